#pragma once

#include <functional>

namespace ttmr {

struct SearchResult {
    double exponent;
    double loss;
    int evaluations;
};

/// Minimize f over log2-exponents: integer scan on [lo, hi], then golden-section
/// inside the neighbouring exponents of the scan winner. Ties go to the smaller exponent.
/// Non-finite losses count as +inf; throws std::runtime_error if every evaluation is non-finite.
SearchResult log2_golden_search(const std::function<double(double)>& f, int lo, int hi, int gss_iters);

}  // namespace ttmr
