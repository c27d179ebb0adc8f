#pragma once

#include "ttmr/tensor.hpp"

namespace ttmr {

double mse(const Vector& y, const Vector& yhat);
/// 1 - var(y - yhat) / var(y), unbiased sample variances.
double explained_variance(const Vector& y, const Vector& yhat);
double spcc(const Vector& y, const Vector& yhat);
double r_squared(const Vector& y, const Vector& yhat);

struct Line {
    double slope;
    double intercept;
};

/// Least-squares yhat ~ m * y + b.
Line fit_line(const Vector& y, const Vector& yhat);

struct MetricReport {
    double mse = 0.0;
    double score = 0.0;
    double spcc = 0.0;
    double r_squared = 0.0;
    double fit_slope = 0.0;
    double fit_intercept = 0.0;
};

/// All metrics at once. Metrics that need target variance are NaN when it is zero;
/// spcc is NaN when the prediction is constant.
MetricReport evaluate(const Vector& y, const Vector& yhat);

}  // namespace ttmr
