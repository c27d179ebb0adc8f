#pragma once

#include "ttmr/report.hpp"
#include "ttmr/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ttmr {

enum class Activation { relu, tanh };
Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

/// One hidden layer, scalar output. Parameters live in one flat vector laid out as
/// [W1 (H x N, column-major), b1 (H), w2 (H), b2].
class Mlp {
public:
    Mlp(std::size_t inputs, std::size_t hidden, Activation act);

    std::size_t inputs() const { return n_; }
    std::size_t hidden() const { return h_; }
    Activation activation() const { return act_; }
    std::size_t param_count() const { return static_cast<std::size_t>(params_.size()); }

    Vector& params() { return params_; }
    const Vector& params() const { return params_; }

    Eigen::Map<Matrix> w1();
    Eigen::Map<const Matrix> w1() const;
    Eigen::Map<Vector> b1();
    Eigen::Map<const Vector> b1() const;
    Eigen::Map<Vector> w2();
    Eigen::Map<const Vector> w2() const;
    double& b2() { return params_(params_.size() - 1); }
    double b2() const { return params_(params_.size() - 1); }

    /// Uniform[-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases.
    void init(std::uint64_t seed);

private:
    std::size_t n_, h_;
    Activation act_;
    Vector params_;
};

std::size_t mlp_param_count(std::size_t inputs, std::size_t hidden);

/// Rows of x are samples.
Vector forward(const Mlp& net, const Matrix& x);
double forward(const Mlp& net, const Vector& x);
/// Gradient of mean squared error over the rows of x, laid out like params().
Vector gradient(const Mlp& net, const Matrix& x, const Vector& y);

struct AdamState {
    double alpha = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double eps = 1e-8;
    bool debias = false;
    Vector m, v;
    std::size_t t = 0;

    void step(Vector& params, const Vector& grad);
};

enum class Optimizer { sgd, adam };
Optimizer parse_optimizer(const std::string& s);
std::string to_string(Optimizer o);

struct MlpTrainConfig {
    Optimizer optimizer = Optimizer::sgd;
    std::size_t max_epochs = 2000;
    std::optional<double> learning_rate;  // SGD; searched when empty
    int lr_lo = -8;
    int lr_hi = 3;
    int lr_gss_iters = 8;
    std::size_t search_epochs = 200;
    double adam_alpha = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double adam_eps = 1e-8;
    bool adam_debias = false;
    double tol = 1e-6;
    double patience_fraction = 0.2;
    bool early_stopping = true;
    std::uint64_t seed = 1;
};

struct MlpFitResult {
    Mlp net;
    FitReport report;
    double learning_rate = 0.0;
};

MlpFitResult train_mlp(std::size_t hidden, Activation act, const Matrix& x_train, const Vector& y_train,
                       const Matrix& x_val, const Vector& y_val, const MlpTrainConfig& cfg);

}  // namespace ttmr
