#include "ttmr/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ttmr {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::size_t multi_index(const Shape& shape, const Index& idx) {
    if (idx.size() != shape.size())
        throw std::invalid_argument("multi_index: index has " + std::to_string(idx.size()) +
                                    " entries, shape has " + std::to_string(shape.size()));
    std::size_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (idx[k] >= shape[k])
            throw std::out_of_range("multi_index: index " + std::to_string(idx[k]) + " out of range on mode " +
                                    std::to_string(k));
        off = off * shape[k] + idx[k];
    }
    return off;
}

Index unflatten(const Shape& shape, std::size_t offset) {
    if (offset >= shape_size(shape)) throw std::out_of_range("unflatten: offset out of range");
    Index idx(shape.size());
    for (std::size_t k = shape.size(); k-- > 0;) {
        idx[k] = offset % shape[k];
        offset /= shape[k];
    }
    return idx;
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {
    for (auto d : shape_)
        if (d == 0) throw std::invalid_argument("DenseTensor: zero dimension");
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto d : shape_)
        if (d == 0) throw std::invalid_argument("DenseTensor: zero dimension");
    if (data_.size() != shape_size(shape_))
        throw std::invalid_argument("DenseTensor: data length does not match shape");
}

double DenseTensor::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

namespace {

void check_mode(const DenseTensor& t, std::size_t n) {
    if (n >= t.order()) throw std::out_of_range("mode " + std::to_string(n) + " out of range");
}

// Strides for a flat tensor split around mode n: outer block (modes < n), the mode itself, inner block (modes > n).
struct ModeSplit {
    std::size_t outer, dim, inner;
};

ModeSplit split_at(const Shape& s, std::size_t n) {
    ModeSplit m{1, s[n], 1};
    for (std::size_t k = 0; k < n; ++k) m.outer *= s[k];
    for (std::size_t k = n + 1; k < s.size(); ++k) m.inner *= s[k];
    return m;
}

}  // namespace

Matrix unfold(const DenseTensor& t, std::size_t n) {
    check_mode(t, n);
    const auto sp = split_at(t.shape(), n);
    Matrix m(sp.dim, sp.outer * sp.inner);
    const auto& d = t.data();
    for (std::size_t a = 0; a < sp.outer; ++a)
        for (std::size_t i = 0; i < sp.dim; ++i)
            for (std::size_t b = 0; b < sp.inner; ++b)
                m(i, a * sp.inner + b) = d[(a * sp.dim + i) * sp.inner + b];
    return m;
}

DenseTensor fold(const Matrix& m, std::size_t n, const Shape& shape) {
    if (n >= shape.size()) throw std::out_of_range("fold: mode out of range");
    const auto sp = split_at(shape, n);
    if (static_cast<std::size_t>(m.rows()) != sp.dim || static_cast<std::size_t>(m.cols()) != sp.outer * sp.inner)
        throw std::invalid_argument("fold: matrix size does not match shape");
    DenseTensor t(shape);
    auto& d = t.data();
    for (std::size_t a = 0; a < sp.outer; ++a)
        for (std::size_t i = 0; i < sp.dim; ++i)
            for (std::size_t b = 0; b < sp.inner; ++b)
                d[(a * sp.dim + i) * sp.inner + b] = m(i, a * sp.inner + b);
    return t;
}

Matrix canonical_matricization(const DenseTensor& t, std::size_t n) {
    if (n < 1 || n > t.order()) throw std::out_of_range("canonical_matricization: n out of range");
    std::size_t rows = 1;
    for (std::size_t k = 0; k < n; ++k) rows *= t.dim(k);
    const std::size_t cols = t.size() / rows;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = t[r * cols + c];
    return m;
}

Vector vec(const DenseTensor& t) {
    return Eigen::Map<const Vector>(t.data().data(), static_cast<Eigen::Index>(t.size()));
}

Vector vec(const Matrix& m) {
    Vector v(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
    return v;
}

DenseTensor n_mode_vec(const DenseTensor& t, std::size_t n, const Vector& x) {
    check_mode(t, n);
    if (static_cast<std::size_t>(x.size()) != t.dim(n))
        throw std::invalid_argument("n_mode_vec: vector length does not match mode size");
    Shape s = t.shape();
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(n));
    if (s.empty()) s.push_back(1);
    Vector r = x.transpose() * unfold(t, n);
    return DenseTensor(s, std::vector<double>(r.data(), r.data() + r.size()));
}

DenseTensor n_mode_mat(const DenseTensor& t, std::size_t n, const Matrix& x) {
    check_mode(t, n);
    if (static_cast<std::size_t>(x.cols()) != t.dim(n))
        throw std::invalid_argument("n_mode_mat: matrix columns do not match mode size");
    Shape s = t.shape();
    s[n] = static_cast<std::size_t>(x.rows());
    return fold(x * unfold(t, n), n, s);
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return k;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column counts differ");
    Matrix k(a.rows() * b.rows(), a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) k.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
    return k;
}

DenseTensor outer(const std::vector<Vector>& vs) {
    if (vs.empty()) throw std::invalid_argument("outer: no vectors");
    Shape s;
    for (const auto& v : vs) s.push_back(static_cast<std::size_t>(v.size()));
    DenseTensor t(s);
    std::vector<double> acc{1.0};
    for (const auto& v : vs) {
        std::vector<double> next;
        next.reserve(acc.size() * static_cast<std::size_t>(v.size()));
        for (double a : acc)
            for (Eigen::Index i = 0; i < v.size(); ++i) next.push_back(a * v(i));
        acc = std::move(next);
    }
    t.data() = std::move(acc);
    return t;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw std::invalid_argument("inner: shapes differ");
    return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

}  // namespace ttmr
