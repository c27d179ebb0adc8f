#include "ttmr/feature_map.hpp"

#include <cmath>
#include <stdexcept>

namespace ttmr {

FeatureMap FeatureMap::polynomial(std::size_t s) {
    if (s < 1) throw std::invalid_argument("polynomial feature map needs S >= 1");
    return {FeatureKind::polynomial, s};
}

FeatureMap FeatureMap::exponential() { return {FeatureKind::exponential, 3}; }

FeatureKind parse_feature_kind(const std::string& s) {
    if (s == "polynomial" || s == "poly") return FeatureKind::polynomial;
    if (s == "exponential" || s == "exp") return FeatureKind::exponential;
    throw std::invalid_argument("unknown feature map '" + s + "'");
}

Vector encode(const FeatureMap& map, double x) {
    if (map.kind == FeatureKind::exponential) {
        if (map.dim != 3) throw std::invalid_argument("exponential feature map has S = 3");
        if (!(x > 0.0)) throw std::domain_error("exponential feature map needs x > 0, got " + std::to_string(x));
        Vector v(3);
        v << 1.0, x, std::log(x);
        return v;
    }
    if (map.dim < 1) throw std::invalid_argument("polynomial feature map needs S >= 1");
    Vector v(static_cast<Eigen::Index>(map.dim));
    v(0) = 1.0;
    for (Eigen::Index j = 1; j < v.size(); ++j) v(j) = v(j - 1) * x;
    return v;
}

Matrix encode_batch(const FeatureMap& map, const Vector& x) {
    Matrix phi(static_cast<Eigen::Index>(map.dim), x.size());
    for (Eigen::Index m = 0; m < x.size(); ++m) {
        try {
            phi.col(m) = encode(map, x(m));
        } catch (const std::domain_error& e) {
            throw std::domain_error(std::string(e.what()) + " (row " + std::to_string(m) + ")");
        }
    }
    return phi;
}

Scaler scaler_fit(const Matrix& train) {
    if (train.rows() == 0) throw std::invalid_argument("scaler_fit: empty training data");
    Scaler sc{train.colwise().minCoeff().transpose(), train.colwise().maxCoeff().transpose()};
    for (Eigen::Index j = 0; j < train.cols(); ++j)
        if (!(sc.hi(j) > sc.lo(j)))
            throw std::domain_error("scaler_fit: column " + std::to_string(j) + " is constant");
    return sc;
}

Vector Scaler::apply(const Vector& x, Eigen::Index col) const {
    const double lo_ = lo(col), hi_ = hi(col);
    return ((x.array() - lo_) * (2.0 / (hi_ - lo_)) - 1.0).matrix();
}

Vector Scaler::inverse(const Vector& z, Eigen::Index col) const {
    const double lo_ = lo(col), hi_ = hi(col);
    return ((z.array() + 1.0) * (0.5 * (hi_ - lo_)) + lo_).matrix();
}

Matrix Scaler::apply(const Matrix& x) const {
    if (x.cols() != lo.size()) throw std::invalid_argument("Scaler::apply: column count mismatch");
    Matrix z(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) z.col(j) = apply(Vector(x.col(j)), j);
    return z;
}

Matrix Scaler::inverse(const Matrix& z) const {
    if (z.cols() != lo.size()) throw std::invalid_argument("Scaler::inverse: column count mismatch");
    Matrix x(z.rows(), z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) x.col(j) = inverse(Vector(z.col(j)), j);
    return x;
}

}  // namespace ttmr
