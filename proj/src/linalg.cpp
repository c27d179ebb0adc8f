#include "ttmr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ttmr {

QrResult qr(const Matrix& a) {
    const Eigen::Index k = std::min(a.rows(), a.cols());
    Eigen::HouseholderQR<Matrix> h(a);
    QrResult out;
    out.q = h.householderQ() * Matrix::Identity(a.rows(), k);
    out.r = h.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return out;
}

PivotedQr pivoted_qr(const Matrix& a) {
    const Eigen::Index k = std::min(a.rows(), a.cols());
    Eigen::ColPivHouseholderQR<Matrix> h(a);
    PivotedQr out;
    out.q = h.householderQ() * Matrix::Identity(a.rows(), k);
    out.r = h.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    out.perm = h.colsPermutation();
    return out;
}

Eigen::Index numerical_rank(const Matrix& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double tol = static_cast<double>(std::max(a.rows(), a.cols())) * std::numeric_limits<double>::epsilon() * s(0);
    return (s.array() > tol).count();
}

Matrix psd_sqrt(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()));
    const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

GsvdFactors gsvd(const Matrix& p, const Matrix& l) {
    const Eigen::Index m = p.rows(), n = p.cols(), q = l.rows();
    if (l.cols() != n) throw std::invalid_argument("gsvd: P and L have different column counts");
    if (m < n)
        throw std::invalid_argument("gsvd: needs at least as many rows as columns in P (" + std::to_string(m) + " < " +
                                    std::to_string(n) + ")");
    Matrix stacked(m + q, n);
    stacked << p, l;
    auto [qq, r] = qr(stacked);
    if (numerical_rank(r) < n) throw SingularSystemError("gsvd: stacked [P; L] is rank deficient");

    Eigen::JacobiSVD<Matrix> svd(qq.topRows(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    GsvdFactors f;
    f.u_p = svd.matrixU();
    f.sigma_p = svd.singularValues().cwiseMin(1.0);
    f.w = svd.matrixV();
    f.r = std::move(r);
    f.v = f.r.transpose() * f.w;

    const Matrix q2w = qq.bottomRows(q) * f.w;
    f.sigma_l.resize(n);
    f.u_l = Matrix::Zero(q, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double nrm = q2w.col(i).norm();
        // Columns with vanishing norm carry sigma_l ~ 0; leave them zero.
        if (nrm > 1e-12) f.u_l.col(i) = q2w.col(i) / nrm;
        f.sigma_l(i) = nrm;
    }
    return f;
}

Vector GsvdFactors::apply_v_inv_t(const Vector& z) const {
    return r.triangularView<Eigen::Upper>().solve(w * z);
}

Vector gsvd_project(const GsvdFactors& f, const Vector& y) {
    if (y.size() != f.u_p.rows()) throw std::invalid_argument("gsvd_project: y length mismatch");
    return f.u_p.transpose() * y;
}

Vector gsvd_solve_projected(const GsvdFactors& f, const Vector& uty, double lambda, double m) {
    const Eigen::Index n = f.cols();
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double c = f.sigma_p(i), s = f.sigma_l(i);
        const double den = c * c + lambda * m * s * s;
        z(i) = den > 0.0 ? c * uty(i) / den : 0.0;
    }
    return f.apply_v_inv_t(z);
}

Vector gsvd_solve(const GsvdFactors& f, const Vector& y, double lambda, double m) {
    return gsvd_solve_projected(f, gsvd_project(f, y), lambda, m);
}

namespace {

void check_finite(const Matrix& a, const char* what) {
    if (!a.allFinite()) throw std::invalid_argument(std::string("solve_direct: non-finite values in ") + what);
}

}  // namespace

Vector solve_direct_gram(const Matrix& p, const Matrix& ltl, const Vector& y, double lambda, double m) {
    if (lambda < 0.0) throw std::invalid_argument("solve_direct: lambda must be >= 0");
    if (p.rows() != y.size() || ltl.rows() != p.cols() || ltl.cols() != p.cols())
        throw std::invalid_argument("solve_direct: dimension mismatch");
    check_finite(p, "P");
    check_finite(ltl, "L^T L");
    check_finite(y, "y");
    const Matrix a = p.transpose() * p + (lambda * m) * ltl;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
        throw SingularSystemError("solve_direct: normal equations are numerically singular");
    return llt.solve(p.transpose() * y);
}

Vector solve_direct(const Matrix& p, const Matrix& l, const Vector& y, double lambda, double m) {
    if (l.cols() != p.cols()) throw std::invalid_argument("solve_direct: P and L have different column counts");
    return solve_direct_gram(p, l.transpose() * l, y, lambda, m);
}

Vector solve_jittered(const Matrix& p, const Matrix& ltl, const Vector& y, double lambda, double m) {
    Matrix a = p.transpose() * p + (lambda * m) * ltl;
    const double n = static_cast<double>(a.rows());
    const double jitter = 1e-10 * std::max(a.trace(), std::numeric_limits<double>::min()) / n;
    a.diagonal().array() += jitter;
    Eigen::LDLT<Matrix> ldlt(a);
    return ldlt.solve(p.transpose() * y);
}

}  // namespace ttmr
