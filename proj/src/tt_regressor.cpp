#include "ttmr/tt_regressor.hpp"

#include "ttmr/search.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ttmr {

const Matrix& SweepCache::left(std::size_t j) const {
    if (j > lpos_) throw std::logic_error("SweepCache: left product " + std::to_string(j) + " is stale");
    return left_.at(j);
}

const Matrix& SweepCache::right(std::size_t j) const {
    if (j < rpos_) throw std::logic_error("SweepCache: right product " + std::to_string(j) + " is stale");
    return right_.at(j);
}

std::vector<Matrix> encode_inputs(const FeatureMap& map, const Matrix& x) {
    std::vector<Matrix> phi;
    phi.reserve(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index k = 0; k < x.cols(); ++k) phi.push_back(encode_batch(map, Vector(x.col(k))));
    return phi;
}

namespace {

// left(j+1)[b, m] = sum_{a,s} left(j)[a, m] G[a, s, b] phi[s, m]
Matrix step_left(const Matrix& left, const DenseTensor& g, const Matrix& phi) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(g.dim(2)), left.cols());
    for (std::size_t s = 0; s < g.dim(1); ++s) {
        const Eigen::Index si = static_cast<Eigen::Index>(s);
        out.noalias() += ((core_slice(g, s).transpose() * left).array().rowwise() * phi.row(si).array()).matrix();
    }
    return out;
}

// right(j)[a, m] = sum_{s,b} G[a, s, b] phi[s, m] right(j+1)[b, m]
Matrix step_right(const Matrix& right, const DenseTensor& g, const Matrix& phi) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(g.dim(0)), right.cols());
    for (std::size_t s = 0; s < g.dim(1); ++s) {
        const Eigen::Index si = static_cast<Eigen::Index>(s);
        out.noalias() += ((core_slice(g, s) * right).array().rowwise() * phi.row(si).array()).matrix();
    }
    return out;
}

void check_phi(const TTTensor& tt, const std::vector<Matrix>& phi) {
    if (phi.size() != tt.order()) throw std::invalid_argument("encoded inputs do not match the TT order");
    for (std::size_t k = 0; k < phi.size(); ++k) {
        if (static_cast<std::size_t>(phi[k].rows()) != tt.core(k).dim(1))
            throw std::invalid_argument("feature dimension of mode " + std::to_string(k) + " does not match core");
        if (phi[k].cols() != phi[0].cols()) throw std::invalid_argument("encoded inputs have different sample counts");
    }
}

DenseTensor tensor_from_rows(const Matrix& m, Shape shape) {
    std::vector<double> d(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) d[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
    return DenseTensor(std::move(shape), std::move(d));
}

double mse_of(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

}  // namespace

SweepCache partial_products_init(const TTTensor& tt, std::vector<Matrix> phi) {
    check_phi(tt, phi);
    SweepCache c;
    const std::size_t n = tt.order();
    c.m_ = phi[0].cols();
    c.phi_ = std::move(phi);
    c.left_.assign(n + 1, Matrix());
    c.right_.assign(n + 1, Matrix());
    c.left_[0] = Matrix::Ones(1, c.m_);
    c.right_[n] = Matrix::Ones(1, c.m_);
    for (std::size_t j = n; j-- > 1;) c.right_[j] = step_right(c.right_[j + 1], tt.core(j), c.phi_[j]);
    c.lpos_ = 0;
    c.rpos_ = n > 1 ? 1 : n;
    return c;
}

void cache_advance(SweepCache& c, const TTTensor& tt, bool left_to_right, std::size_t k) {
    if (left_to_right) {
        if (c.lpos_ < k) throw std::logic_error("cache_advance: left product stale at " + std::to_string(k));
        c.left_[k + 1] = step_left(c.left_[k], tt.core(k), c.phi_[k]);
        c.lpos_ = k + 1;
    } else {
        if (c.rpos_ > k + 1) throw std::logic_error("cache_advance: right product stale at " + std::to_string(k));
        c.right_[k] = step_right(c.right_[k + 1], tt.core(k), c.phi_[k]);
        c.rpos_ = k;
    }
}

void cache_invalidate(SweepCache& c, std::size_t k) {
    c.lpos_ = std::min(c.lpos_, k);
    c.rpos_ = std::max(c.rpos_, k + 1);
}

Matrix design_matrix(const SweepCache& cache, std::size_t k) {
    if (!cache.ready_for(k)) throw std::logic_error("design_matrix: cache is not positioned at core " + std::to_string(k));
    const Matrix& phi = cache.phi(k);
    const Matrix& l = cache.left(k);
    const Matrix& r = cache.right(k + 1);
    const Eigen::Index s = phi.rows(), r0 = l.rows(), r1 = r.rows(), m = phi.cols();
    Matrix p(m, s * r0 * r1);
    for (Eigen::Index j = 0; j < s; ++j)
        for (Eigen::Index a = 0; a < r0; ++a) {
            const Eigen::ArrayXd w = phi.row(j).array() * l.row(a).array();
            for (Eigen::Index b = 0; b < r1; ++b) p.col((j * r0 + a) * r1 + b) = (w * r.row(b).array().transpose()).matrix();
        }
    return p;
}

Matrix regularizer_explicit(const TTTensor& tt, std::size_t k) {
    const auto ip = interfaces(tt, k);
    const auto s = static_cast<Eigen::Index>(tt.core(k).dim(1));
    return kronecker(Matrix::Identity(s, s), kronecker(ip.left, ip.right));
}

Matrix regularizer_gram(const TTTensor& tt, std::size_t k) {
    const auto s = static_cast<Eigen::Index>(tt.core(k).dim(1));
    return kronecker(Matrix::Identity(s, s), kronecker(left_gram(tt, k), right_gram(tt, k)));
}

Matrix regularizer_factor(const TTTensor& tt, std::size_t k) {
    const auto s = static_cast<Eigen::Index>(tt.core(k).dim(1));
    return kronecker(Matrix::Identity(s, s), kronecker(psd_sqrt(left_gram(tt, k)), psd_sqrt(right_gram(tt, k))));
}

CoreSolver::CoreSolver(const Matrix& p, const Matrix& l_factor, const Vector& y) : p_(p), y_(y) {
    if (p.rows() != y.size()) throw std::invalid_argument("CoreSolver: P and y disagree on sample count");
    if (l_factor.cols() != p.cols()) throw std::invalid_argument("CoreSolver: P and L disagree on column count");
    ltl_ = l_factor.transpose() * l_factor;
    if (p.rows() >= p.cols()) {
        try {
            gsvd_ = gsvd(p, l_factor);
            uty_ = gsvd_project(*gsvd_, y);
        } catch (const SingularSystemError&) {
            gsvd_.reset();
        }
    }
}

Vector CoreSolver::theta(double lambda) {
    const double m = static_cast<double>(p_.rows());
    if (gsvd_) return gsvd_solve_projected(*gsvd_, uty_, lambda, m);
    try {
        return solve_direct_gram(p_, ltl_, y_, lambda, m);
    } catch (const SingularSystemError&) {
        if (!fallback_) spdlog::warn("regularized system is singular; adding diagonal jitter");
        fallback_ = true;
        return solve_jittered(p_, ltl_, y_, lambda, m);
    }
}

namespace {

LambdaChoice choose_lambda(CoreSolver& solver, const Matrix& p_val, const Vector& y_val, const TrainConfig& cfg) {
    if (cfg.fixed_lambda) {
        const Vector th = solver.theta(*cfg.fixed_lambda);
        return {*cfg.fixed_lambda, mse_of(p_val * th, y_val), solver.used_fallback()};
    }
    if (y_val.size() == 0) throw std::invalid_argument("select_lambda: validation split is empty");
    auto loss = [&](double e) { return mse_of(p_val * solver.theta(std::exp2(e)), y_val); };
    const auto res = log2_golden_search(loss, cfg.lambda_lo, cfg.lambda_hi, cfg.gss_iters);
    return {std::exp2(res.exponent), res.loss, solver.used_fallback()};
}

}  // namespace

LambdaChoice select_lambda(const Matrix& p_train, const Matrix& l_factor, const Vector& y_train, const Matrix& p_val,
                           const Vector& y_val, const TrainConfig& cfg) {
    CoreSolver solver(p_train, l_factor, y_train);
    return choose_lambda(solver, p_val, y_val, cfg);
}

void core_update(TTTensor& tt, std::size_t k, const Vector& theta) {
    const auto& c = tt.core(k);
    tt.set_core(k, core_from_theta(theta, c.dim(0), c.dim(1), c.dim(2)));
}

std::size_t orthogonalize_and_shift(TTTensor& tt, std::size_t k, bool left_to_right, std::size_t cap) {
    const std::size_t n = tt.order();
    if (k >= n || (left_to_right && k + 1 >= n) || (!left_to_right && k == 0))
        throw std::out_of_range("orthogonalize_and_shift: no neighbour in that direction");
    const DenseTensor& g = tt.core(k);
    const std::size_t r0 = g.dim(0), s = g.dim(1), r1 = g.dim(2);

    // Forward: G_3^T = (r0 s) x r1. Backward: G_1^T = (s r1) x r0.
    const Matrix a = left_to_right ? canonical_matricization(g, 2) : Matrix(canonical_matricization(g, 1).transpose());
    const auto pq = pivoted_qr(a);
    const auto rho = static_cast<std::size_t>(numerical_rank(a));
    const std::size_t r = std::max<std::size_t>(
        1, std::min({rho, cap, static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols())}));
    const auto ri = static_cast<Eigen::Index>(r);
    const Matrix q = pq.q.leftCols(ri);
    const Matrix carry = (pq.r * pq.perm.transpose()).topRows(ri);

    if (left_to_right) {
        tt.set_core(k, tensor_from_rows(q, {r0, s, r}));
        tt.set_core(k + 1, n_mode_mat(tt.core(k + 1), 0, carry));
    } else {
        tt.set_core(k, tensor_from_rows(q.transpose(), {r, s, r1}));
        tt.set_core(k - 1, n_mode_mat(tt.core(k - 1), 2, carry));
    }
    tt.validate();
    return r;
}

Vector predict(const TTTensor& tt, const FeatureMap& map, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != tt.order())
        throw std::invalid_argument("predict: input has " + std::to_string(x.cols()) + " columns, model expects " +
                                    std::to_string(tt.order()));
    Matrix v = Matrix::Ones(1, x.rows());
    for (std::size_t k = 0; k < tt.order(); ++k)
        v = step_left(v, tt.core(k), encode_batch(map, Vector(x.col(static_cast<Eigen::Index>(k)))));
    return v.row(0).transpose();
}

Vector predict(const TTTensor& tt, const FeatureMap& map, const Scaler& scaler, const Matrix& raw) {
    return predict(tt, map, scaler.apply(raw));
}

namespace {

TTTensor mean_predictor(const Shape& dims, double mean) {
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        DenseTensor c({1, dims[k], 1});
        c[0] = k == 0 ? mean : 1.0;
        cores.push_back(std::move(c));
    }
    return TTTensor(std::move(cores));
}

double frobenius_mismatch(const TTTensor& tt, std::size_t k) {
    const Vector th = core_theta(tt.core(k));
    const double via_l = th.dot(regularizer_gram(tt, k) * th);
    const double dense = std::pow(to_dense(tt).frobenius_norm(), 2);
    return std::abs(via_l - dense) / std::max(dense, 1e-300);
}

}  // namespace

FitResult fit(const Matrix& x_train, const Vector& y_train, const Matrix& x_val, const Vector& y_val,
              const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size())
        throw std::invalid_argument("fit: inputs and targets disagree on sample count");
    if (x_train.cols() != x_val.cols() || x_train.cols() == 0) throw std::invalid_argument("fit: input width mismatch");
    if (x_train.rows() == 0) throw std::invalid_argument("fit: empty training split");
    if (cfg.max_sweeps < 1 || !(cfg.tol > 0.0)) throw std::invalid_argument("fit: max_sweeps >= 1 and tol > 0 required");

    const std::size_t n = static_cast<std::size_t>(x_train.cols());
    const Shape dims(n, cfg.map.dim);
    FitResult out;
    FitReport& rep = out.report;

    if (y_train.maxCoeff() == y_train.minCoeff()) {
        out.tt = mean_predictor(dims, y_train(0));
        rep.degenerate = true;
        rep.warnings.push_back("constant training target; returning the mean predictor");
        spdlog::warn("fit: constant training target, returning mean predictor");
        rep.ranks = out.tt.ranks();
        rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    }

    TTTensor tt = random_init(dims, cfg.rank_cap, cfg.seed);
    if (cfg.orthogonalize_init)
        for (std::size_t k = n; k-- > 1;) orthogonalize_and_shift(tt, k, false, cfg.rank_cap);

    SweepCache tr = partial_products_init(tt, encode_inputs(cfg.map, x_train));
    SweepCache va = partial_products_init(tt, encode_inputs(cfg.map, x_val));

    TTTensor best = tt;
    double best_val = mse_of(predict(tt, cfg.map, x_val), y_val);
    rep.best_iteration = 0;
    EarlyStopper stopper(cfg.tol, patience_for(cfg.max_sweeps, cfg.patience_fraction));
    stopper.update(best_val);

    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        const bool forward = sweep % 2 == 1;
        std::vector<std::size_t> order;
        if (n == 1) {
            order.push_back(0);
        } else if (forward) {
            for (std::size_t k = 0; k + 1 < n; ++k) order.push_back(k);
        } else {
            for (std::size_t k = n - 1; k >= 1; --k) order.push_back(k);
        }

        for (std::size_t k : order) {
            const Matrix p = design_matrix(tr, k);
            const Matrix pv = design_matrix(va, k);
            const Matrix lf = regularizer_factor(tt, k);
            CoreSolver solver(p, lf, y_train);
            const LambdaChoice choice = choose_lambda(solver, pv, y_val, cfg);
            const Vector theta = solver.theta(choice.lambda);
            if (!theta.allFinite()) throw std::runtime_error("fit: non-finite core estimate at core " + std::to_string(k));
            if (solver.used_fallback()) ++rep.solver_fallbacks;
            core_update(tt, k, theta);
            rep.rows.push_back({sweep, static_cast<long>(k), choice.lambda, mse_of(p * theta, y_train),
                                mse_of(pv * theta, y_val)});

            cache_invalidate(tr, k);
            cache_invalidate(va, k);
            if (n > 1) {
                const std::size_t nb = forward ? k + 1 : k - 1;
                orthogonalize_and_shift(tt, k, forward, cfg.rank_cap);
                cache_invalidate(tr, nb);
                cache_invalidate(va, nb);
                cache_advance(tr, tt, forward, k);
                cache_advance(va, tt, forward, k);
            }
        }

        const double tr_loss = mse_of(predict(tt, cfg.map, x_train), y_train);
        const double va_loss = mse_of(predict(tt, cfg.map, x_val), y_val);
        rep.train_loss.push_back(tr_loss);
        rep.val_loss.push_back(va_loss);
        rep.iterations = sweep;
        if (cfg.check_invariants && shape_size(dims) <= 100000) {
            for (std::size_t k = 0; k < n; ++k)
                if (frobenius_mismatch(tt, k) > 1e-8)
                    rep.warnings.push_back("Frobenius identity drift at sweep " + std::to_string(sweep) + ", core " +
                                           std::to_string(k));
        }
        if (va_loss < best_val) {
            best_val = va_loss;
            best = tt;
            rep.best_iteration = sweep;
        }
        if (cfg.early_stopping && stopper.update(va_loss)) {
            rep.stopped_early = true;
            rep.stop_iteration = sweep;
            break;
        }
    }

    out.tt = std::move(best);
    rep.ranks = out.tt.ranks();
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace ttmr
