#include "ttmr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttmr {

namespace {

void check(const Vector& y, const Vector& yhat, Eigen::Index min_len, const char* who) {
    if (y.size() != yhat.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
    if (y.size() < min_len)
        throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_len) + " samples");
}

double unbiased_var(const Vector& v) {
    const double mu = v.mean();
    return (v.array() - mu).square().sum() / static_cast<double>(v.size() - 1);
}

double sum_sq_dev(const Vector& v) { return (v.array() - v.mean()).square().sum(); }

}  // namespace

double mse(const Vector& y, const Vector& yhat) {
    check(y, yhat, 1, "mse");
    return (y - yhat).squaredNorm() / static_cast<double>(y.size());
}

double explained_variance(const Vector& y, const Vector& yhat) {
    check(y, yhat, 2, "explained_variance");
    const double vy = unbiased_var(y);
    if (!(vy > 0.0)) throw std::domain_error("explained_variance: target has zero variance");
    return 1.0 - unbiased_var(y - yhat) / vy;
}

double spcc(const Vector& y, const Vector& yhat) {
    check(y, yhat, 2, "spcc");
    const Eigen::ArrayXd a = y.array() - y.mean();
    const Eigen::ArrayXd b = yhat.array() - yhat.mean();
    const double na = std::sqrt(a.square().sum()), nb = std::sqrt(b.square().sum());
    if (!(na > 0.0) || !(nb > 0.0)) throw std::domain_error("spcc: zero variance");
    return std::clamp((a * b).sum() / (na * nb), -1.0, 1.0);
}

double r_squared(const Vector& y, const Vector& yhat) {
    check(y, yhat, 2, "r_squared");
    const double tot = sum_sq_dev(y);
    if (!(tot > 0.0)) throw std::domain_error("r_squared: target has zero variance");
    return 1.0 - (y - yhat).squaredNorm() / tot;
}

Line fit_line(const Vector& y, const Vector& yhat) {
    check(y, yhat, 2, "fit_line");
    const double my = y.mean(), mh = yhat.mean();
    const double sxx = sum_sq_dev(y);
    if (!(sxx > 0.0)) throw std::domain_error("fit_line: target has zero variance");
    const double sxy = ((y.array() - my) * (yhat.array() - mh)).sum();
    const double m = sxy / sxx;
    return {m, mh - m * my};
}

MetricReport evaluate(const Vector& y, const Vector& yhat) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricReport r;
    r.mse = mse(y, yhat);
    auto guard = [&](auto fn) {
        try {
            return fn();
        } catch (const std::domain_error&) {
            return nan;
        } catch (const std::invalid_argument&) {
            return nan;
        }
    };
    r.score = guard([&] { return explained_variance(y, yhat); });
    r.spcc = guard([&] { return spcc(y, yhat); });
    r.r_squared = guard([&] { return r_squared(y, yhat); });
    r.fit_slope = guard([&] { return fit_line(y, yhat).slope; });
    r.fit_intercept = guard([&] { return fit_line(y, yhat).intercept; });
    return r;
}

}  // namespace ttmr
