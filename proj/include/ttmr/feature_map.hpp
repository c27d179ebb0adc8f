#pragma once

#include "ttmr/tensor.hpp"

#include <string>
#include <vector>

namespace ttmr {

enum class FeatureKind { polynomial, exponential };

struct FeatureMap {
    FeatureKind kind = FeatureKind::polynomial;
    std::size_t dim = 2;

    static FeatureMap polynomial(std::size_t s);
    static FeatureMap exponential();
};

FeatureKind parse_feature_kind(const std::string& s);

/// Polynomial: (1, x, ..., x^{S-1}). Exponential: (1, x, log x).
Vector encode(const FeatureMap& map, double x);
/// S x M matrix, column m = encode(x[m]).
Matrix encode_batch(const FeatureMap& map, const Vector& x);

/// Per-column min-max scaler onto [-1, 1], fitted on training rows only.
struct Scaler {
    Vector lo, hi;

    Matrix apply(const Matrix& x) const;
    Matrix inverse(const Matrix& z) const;
    Vector apply(const Vector& x, Eigen::Index col) const;
    Vector inverse(const Vector& z, Eigen::Index col) const;
};

Scaler scaler_fit(const Matrix& train);

}  // namespace ttmr
