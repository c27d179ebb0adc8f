#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace ttmr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Shape = std::vector<std::size_t>;
using Index = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

/// Flat offset of a 0-based multi-index. Leftmost index varies slowest.
std::size_t multi_index(const Shape& shape, const Index& idx);
Index unflatten(const Shape& shape, std::size_t offset);

class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t order() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t n) const { return shape_.at(n); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(const Index& idx) { return data_[multi_index(shape_, idx)]; }
    double at(const Index& idx) const { return data_[multi_index(shape_, idx)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double frobenius_norm() const;

private:
    Shape shape_;
    std::vector<double> data_;
};

// Modes are 0-based throughout.
Matrix unfold(const DenseTensor& t, std::size_t n);
DenseTensor fold(const Matrix& m, std::size_t n, const Shape& shape);

/// (I_1..I_n) x (I_{n+1}..I_N) with n counted from 1; n = N gives vec(t).
Matrix canonical_matricization(const DenseTensor& t, std::size_t n);

Vector vec(const DenseTensor& t);
Vector vec(const Matrix& m);  // row-major

DenseTensor n_mode_vec(const DenseTensor& t, std::size_t n, const Vector& x);
DenseTensor n_mode_mat(const DenseTensor& t, std::size_t n, const Matrix& x);

Matrix kronecker(const Matrix& a, const Matrix& b);
Matrix khatri_rao(const Matrix& a, const Matrix& b);
DenseTensor outer(const std::vector<Vector>& vs);
double inner(const DenseTensor& a, const DenseTensor& b);

}  // namespace ttmr
