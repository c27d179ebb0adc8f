#include "ttmr/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>

namespace ttmr {

void write_trace(const FitReport& r, std::ostream& os) {
    os << "sweep,core,lambda,train_mse,val_mse\n";
    for (const auto& row : r.rows)
        os << fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", row.sweep, row.core, row.step, row.train_mse, row.val_mse);
}

bool EarlyStopper::update(double val_loss) {
    if (first_) {
        first_ = false;
        prev_ = val_loss;
        return false;
    }
    const double rel = (prev_ - val_loss) / std::max(std::abs(prev_), 1e-300);
    prev_ = val_loss;
    stall_ = rel < tol_ ? stall_ + 1 : 0;
    return stall_ >= patience_;
}

std::size_t patience_for(std::size_t max_iters, double fraction) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(max_iters) - 1e-12)));
}

}  // namespace ttmr
