#pragma once

#include "ttmr/feature_map.hpp"
#include "ttmr/linalg.hpp"
#include "ttmr/report.hpp"
#include "ttmr/tt_tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ttmr {

/// Left/right partial products for one data set. left(j) contracts cores 0..j-1
/// (R_j x M), right(j) contracts cores j..N-1 (R_j x M); left(0) and right(N) are ones.
class SweepCache {
public:
    SweepCache() = default;

    std::size_t order() const { return phi_.size(); }
    Eigen::Index samples() const { return m_; }
    const Matrix& phi(std::size_t k) const { return phi_.at(k); }
    const Matrix& left(std::size_t j) const;
    const Matrix& right(std::size_t j) const;

    /// True when left(k) and right(k+1) reflect the current cores.
    bool ready_for(std::size_t k) const { return lpos_ >= k && rpos_ <= k + 1; }

    friend SweepCache partial_products_init(const TTTensor& tt, std::vector<Matrix> phi);
    friend void cache_advance(SweepCache& cache, const TTTensor& tt, bool left_to_right, std::size_t k);
    friend void cache_invalidate(SweepCache& cache, std::size_t k);

private:
    std::vector<Matrix> phi_;
    std::vector<Matrix> left_, right_;
    std::size_t lpos_ = 0;  // left(j) valid for j <= lpos_
    std::size_t rpos_ = 0;  // right(j) valid for j >= rpos_
    Eigen::Index m_ = 0;
};

std::vector<Matrix> encode_inputs(const FeatureMap& map, const Matrix& x);

/// Builds every right partial product; left is valid at the boundary only.
SweepCache partial_products_init(const TTTensor& tt, std::vector<Matrix> phi);
/// Extend the left cache past core k (left_to_right) or the right cache past core k.
void cache_advance(SweepCache& cache, const TTTensor& tt, bool left_to_right, std::size_t k);
/// Mark products that depend on core k as stale.
void cache_invalidate(SweepCache& cache, std::size_t k);

/// M x (S_k R_{k-1} R_k); column (s, a, b) with s slowest matches core_theta().
Matrix design_matrix(const SweepCache& cache, std::size_t k);

/// Explicit L_k = I_S kron (left kron right); only for small models.
Matrix regularizer_explicit(const TTTensor& tt, std::size_t k);
/// L_k^T L_k = I_S kron (Gram^- kron Gram^+).
Matrix regularizer_gram(const TTTensor& tt, std::size_t k);
/// Square factor F with F^T F = L_k^T L_k.
Matrix regularizer_factor(const TTTensor& tt, std::size_t k);

struct TrainConfig {
    std::size_t rank_cap = 2;
    FeatureMap map = FeatureMap::polynomial(2);
    int lambda_lo = -10;
    int lambda_hi = 10;
    int gss_iters = 20;
    std::size_t max_sweeps = 12;
    double tol = 1e-6;
    double patience_fraction = 0.2;
    std::uint64_t seed = 1;
    bool orthogonalize_init = true;
    bool early_stopping = true;
    std::optional<double> fixed_lambda;  // skip the search
    bool check_invariants = false;       // Frobenius spot-check once per sweep
};

/// Regularized least squares for one core at many lambda values. Factorizes once
/// (GSVD when M >= n); otherwise, or when the stacked pair is singular, uses the normal equations.
class CoreSolver {
public:
    CoreSolver(const Matrix& p, const Matrix& l_factor, const Vector& y);

    Vector theta(double lambda);
    bool used_fallback() const { return fallback_; }
    bool uses_gsvd() const { return gsvd_.has_value(); }

private:
    const Matrix& p_;
    const Vector& y_;
    Matrix ltl_;
    std::optional<GsvdFactors> gsvd_;
    Vector uty_;
    bool fallback_ = false;
};

struct LambdaChoice {
    double lambda;
    double val_mse;
    bool fallback;
};

/// Scan + golden-section over log2(lambda) on validation MSE.
LambdaChoice select_lambda(const Matrix& p_train, const Matrix& l_factor, const Vector& y_train, const Matrix& p_val,
                           const Vector& y_val, const TrainConfig& cfg);

/// Write theta into core k.
void core_update(TTTensor& tt, std::size_t k, const Vector& theta);

/// QR of the core unfolding, truncation to min(numerical rank, cap), and absorption of
/// R into the neighbour (k+1 when left_to_right, else k-1). Returns the new bond rank.
std::size_t orthogonalize_and_shift(TTTensor& tt, std::size_t k, bool left_to_right, std::size_t cap);

struct FitResult {
    TTTensor tt;
    FitReport report;
};

/// Alternating sweeps over already scaled inputs.
FitResult fit(const Matrix& x_train, const Vector& y_train, const Matrix& x_val, const Vector& y_val,
              const TrainConfig& cfg);

/// Predictions on already scaled inputs.
Vector predict(const TTTensor& tt, const FeatureMap& map, const Matrix& x);
/// Predictions on raw inputs, scaled first.
Vector predict(const TTTensor& tt, const FeatureMap& map, const Scaler& scaler, const Matrix& raw);

}  // namespace ttmr
