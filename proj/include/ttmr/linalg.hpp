#pragma once

#include "ttmr/tensor.hpp"

#include <stdexcept>
#include <string>

namespace ttmr {

class SingularSystemError : public std::runtime_error {
public:
    explicit SingularSystemError(const std::string& what) : std::runtime_error(what) {}
};

struct QrResult {
    Matrix q;  // thin, rows x min(rows, cols)
    Matrix r;  // min(rows, cols) x cols, upper triangular
};

QrResult qr(const Matrix& a);

/// Column-pivoted QR: a * perm = q * r.
struct PivotedQr {
    Matrix q;
    Matrix r;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm;
};

PivotedQr pivoted_qr(const Matrix& a);

/// Rank with tolerance max(rows, cols) * eps * sigma_max.
Eigen::Index numerical_rank(const Matrix& a);

/// Symmetric PSD square root; negative eigenvalues from round-off are clamped to zero.
Matrix psd_sqrt(const Matrix& g);

/// P = U_P diag(sigma_p) V^T, L = U_L diag(sigma_l) V^T with sigma_p^2 + sigma_l^2 = 1.
struct GsvdFactors {
    Matrix u_p, u_l;
    Vector sigma_p, sigma_l;
    Matrix v;

    // V^{-T} = R^{-1} W, applied without inverting.
    Matrix r;
    Matrix w;

    Eigen::Index cols() const { return v.cols(); }
    Vector apply_v_inv_t(const Vector& z) const;
};

GsvdFactors gsvd(const Matrix& p, const Matrix& l);

/// theta = (P^T P + lambda M L^T L)^{-1} P^T y.
Vector solve_direct(const Matrix& p, const Matrix& l, const Vector& y, double lambda, double m);
/// Same, with L^T L passed in already formed.
Vector solve_direct_gram(const Matrix& p, const Matrix& ltl, const Vector& y, double lambda, double m);
/// Normal equations with 1e-10 * trace / n added to the diagonal.
Vector solve_jittered(const Matrix& p, const Matrix& ltl, const Vector& y, double lambda, double m);

Vector gsvd_solve(const GsvdFactors& f, const Vector& y, double lambda, double m);
/// Projection U_P^T y, reusable across lambda values.
Vector gsvd_project(const GsvdFactors& f, const Vector& y);
Vector gsvd_solve_projected(const GsvdFactors& f, const Vector& uty, double lambda, double m);

}  // namespace ttmr
