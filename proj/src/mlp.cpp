#include "ttmr/mlp.hpp"

#include "ttmr/search.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ttmr {

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation '" + s + "'");
}

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "tanh"; }

Optimizer parse_optimizer(const std::string& s) {
    if (s == "sgd") return Optimizer::sgd;
    if (s == "adam") return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer '" + s + "'");
}

std::string to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

std::size_t mlp_param_count(std::size_t inputs, std::size_t hidden) { return inputs * hidden + 2 * hidden + 1; }

Mlp::Mlp(std::size_t inputs, std::size_t hidden, Activation act)
    : n_(inputs), h_(hidden), act_(act), params_(Vector::Zero(static_cast<Eigen::Index>(mlp_param_count(inputs, hidden)))) {
    if (inputs == 0 || hidden == 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
}

namespace {
Eigen::Index ei(std::size_t v) { return static_cast<Eigen::Index>(v); }
}  // namespace

Eigen::Map<Matrix> Mlp::w1() { return {params_.data(), ei(h_), ei(n_)}; }
Eigen::Map<const Matrix> Mlp::w1() const { return {params_.data(), ei(h_), ei(n_)}; }
Eigen::Map<Vector> Mlp::b1() { return {params_.data() + h_ * n_, ei(h_)}; }
Eigen::Map<const Vector> Mlp::b1() const { return {params_.data() + h_ * n_, ei(h_)}; }
Eigen::Map<Vector> Mlp::w2() { return {params_.data() + h_ * n_ + h_, ei(h_)}; }
Eigen::Map<const Vector> Mlp::w2() const { return {params_.data() + h_ * n_ + h_, ei(h_)}; }

void Mlp::init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(static_cast<double>(n_)),
                                              1.0 / std::sqrt(static_cast<double>(n_)));
    std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(static_cast<double>(h_)),
                                              1.0 / std::sqrt(static_cast<double>(h_)));
    params_.setZero();
    auto w = w1();
    for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u1(rng);
    auto v = w2();
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u2(rng);
}

namespace {

Matrix pre_activation(const Mlp& net, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != net.inputs())
        throw std::invalid_argument("Mlp: input width " + std::to_string(x.cols()) + ", expected " +
                                    std::to_string(net.inputs()));
    return (x * net.w1().transpose()).rowwise() + net.b1().transpose();
}

Matrix activate(Activation a, const Matrix& z) {
    return a == Activation::relu ? Matrix(z.cwiseMax(0.0)) : Matrix(z.array().tanh().matrix());
}

}  // namespace

Vector forward(const Mlp& net, const Matrix& x) {
    return (activate(net.activation(), pre_activation(net, x)) * net.w2()).array() + net.b2();
}

double forward(const Mlp& net, const Vector& x) { return forward(net, Matrix(x.transpose()))(0); }

Vector gradient(const Mlp& net, const Matrix& x, const Vector& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("gradient: sample count mismatch");
    const Matrix z = pre_activation(net, x);
    const Matrix a = activate(net.activation(), z);
    const Vector d = (2.0 / static_cast<double>(x.rows())) * ((a * net.w2()).array() + net.b2() - y.array()).matrix();

    Matrix dz = d * net.w2().transpose();
    if (net.activation() == Activation::relu)
        dz.array() *= (z.array() > 0.0).cast<double>();
    else
        dz.array() *= 1.0 - a.array().square();

    Mlp g(net.inputs(), net.hidden(), net.activation());
    g.w1() = dz.transpose() * x;
    g.b1() = dz.colwise().sum().transpose();
    g.w2() = a.transpose() * d;
    g.b2() = d.sum();
    return g.params();
}

void AdamState::step(Vector& params, const Vector& grad) {
    if (m.size() != params.size()) {
        m = Vector::Zero(params.size());
        v = Vector::Zero(params.size());
    }
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
    if (debias) {
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        params.array() -= alpha * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    } else {
        params.array() -= alpha * m.array() / (v.array().sqrt() + eps);
    }
}

namespace {

double mse_of(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / static_cast<double>(a.size()); }

struct RunOutcome {
    Mlp best;
    FitReport report;
};

RunOutcome run_epochs(Mlp net, const Matrix& xt, const Vector& yt, const Matrix& xv, const Vector& yv,
                      const MlpTrainConfig& cfg, double lr, std::size_t epochs, bool trace) {
    RunOutcome out{net, {}};
    FitReport& rep = out.report;
    AdamState adam{cfg.adam_alpha, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.adam_debias, {}, {}, 0};
    double best_val = mse_of(forward(net, xv), yv);
    EarlyStopper stopper(cfg.tol, patience_for(epochs, cfg.patience_fraction));
    stopper.update(best_val);
    for (std::size_t e = 1; e <= epochs; ++e) {
        const Vector g = gradient(net, xt, yt);
        if (cfg.optimizer == Optimizer::sgd)
            net.params() -= lr * g;
        else
            adam.step(net.params(), g);
        const double tr = mse_of(forward(net, xt), yt);
        const double va = mse_of(forward(net, xv), yv);
        if (!std::isfinite(tr) || !std::isfinite(va) || !net.params().allFinite()) {
            rep.aborted = true;
            rep.warnings.push_back("non-finite loss at epoch " + std::to_string(e));
            break;
        }
        rep.train_loss.push_back(tr);
        rep.val_loss.push_back(va);
        if (trace) rep.rows.push_back({e, -1, cfg.optimizer == Optimizer::sgd ? lr : cfg.adam_alpha, tr, va});
        rep.iterations = e;
        if (va < best_val) {
            best_val = va;
            out.best = net;
            rep.best_iteration = e;
        }
        if (cfg.early_stopping && stopper.update(va)) {
            rep.stopped_early = true;
            rep.stop_iteration = e;
            break;
        }
    }
    return out;
}

}  // namespace

MlpFitResult train_mlp(std::size_t hidden, Activation act, const Matrix& x_train, const Vector& y_train,
                       const Matrix& x_val, const Vector& y_val, const MlpTrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size())
        throw std::invalid_argument("train_mlp: inputs and targets disagree on sample count");
    if (x_train.rows() == 0 || x_val.rows() == 0) throw std::invalid_argument("train_mlp: empty split");
    if (cfg.max_epochs < 1) throw std::invalid_argument("train_mlp: max_epochs must be >= 1");

    Mlp net(static_cast<std::size_t>(x_train.cols()), hidden, act);
    net.init(cfg.seed);

    double lr = cfg.learning_rate.value_or(0.0);
    if (cfg.optimizer == Optimizer::sgd && !cfg.learning_rate) {
        auto loss = [&](double e) {
            auto r = run_epochs(net, x_train, y_train, x_val, y_val, cfg, std::exp2(e), cfg.search_epochs, false);
            if (r.report.aborted) return std::numeric_limits<double>::infinity();
            return r.report.val_loss.empty() ? std::numeric_limits<double>::infinity()
                                             : *std::min_element(r.report.val_loss.begin(), r.report.val_loss.end());
        };
        lr = std::exp2(log2_golden_search(loss, cfg.lr_lo, cfg.lr_hi, cfg.lr_gss_iters).exponent);
    }

    auto run = run_epochs(net, x_train, y_train, x_val, y_val, cfg, lr, cfg.max_epochs, true);
    if (run.report.aborted) spdlog::warn("train_mlp: training diverged, keeping best snapshot");
    MlpFitResult out{std::move(run.best), std::move(run.report), lr};
    out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace ttmr
