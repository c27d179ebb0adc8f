#include "ttmr/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttmr {

namespace {

struct Best {
    double x = 0.0;
    double f = std::numeric_limits<double>::infinity();
    bool any = false;

    void offer(double xv, double fv) {
        if (!std::isfinite(fv)) return;
        if (!any || fv < f || (fv == f && xv < x)) {
            x = xv;
            f = fv;
            any = true;
        }
    }
};

double finite_or_inf(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

}  // namespace

SearchResult log2_golden_search(const std::function<double(double)>& f, int lo, int hi, int gss_iters) {
    if (hi < lo) throw std::invalid_argument("log2_golden_search: empty exponent range");
    Best best;
    int evals = 0;
    for (int e = lo; e <= hi; ++e) {
        best.offer(e, f(e));
        ++evals;
    }
    if (!best.any) throw std::runtime_error("log2_golden_search: every candidate gave a non-finite loss");

    double a = std::max<double>(lo, best.x - 1.0);
    double b = std::min<double>(hi, best.x + 1.0);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = finite_or_inf(f(c)), fd = finite_or_inf(f(d));
    evals += 2;
    best.offer(c, fc);
    best.offer(d, fd);
    for (int it = 0; it < gss_iters && b - a > 1e-9; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = finite_or_inf(f(c));
            best.offer(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = finite_or_inf(f(d));
            best.offer(d, fd);
        }
        ++evals;
    }
    return {best.x, best.f, evals};
}

}  // namespace ttmr
