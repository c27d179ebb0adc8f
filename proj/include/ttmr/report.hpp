#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttmr {

/// One trace row. For the TT trainer `core` is the updated core and `step` the
/// regularization weight; for the MLP `core` is -1 and `step` the learning rate.
struct TraceRow {
    std::size_t sweep = 0;
    long core = -1;
    double step = 0.0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct FitReport {
    std::vector<TraceRow> rows;
    std::vector<double> train_loss;  // one entry per sweep or epoch
    std::vector<double> val_loss;
    std::size_t iterations = 0;      // sweeps or epochs completed
    std::size_t best_iteration = 0;  // 1-based; 0 means the initial model
    std::size_t stop_iteration = 0;  // sweep/epoch at which the stopping rule fired, 0 if it never did
    bool stopped_early = false;
    bool degenerate = false;
    bool aborted = false;
    std::size_t solver_fallbacks = 0;
    std::vector<std::size_t> ranks;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// CSV with header sweep,core,lambda,train_mse,val_mse.
void write_trace(const FitReport& r, std::ostream& os);

/// Relative-improvement stopping rule shared by both trainers.
class EarlyStopper {
public:
    EarlyStopper(double tol, std::size_t patience) : tol_(tol), patience_(patience) {}
    /// Feed the validation loss of a finished sweep/epoch; true when training should stop.
    bool update(double val_loss);

private:
    double tol_;
    std::size_t patience_;
    std::size_t stall_ = 0;
    double prev_ = -1.0;
    bool first_ = true;
};

std::size_t patience_for(std::size_t max_iters, double fraction);

}  // namespace ttmr
