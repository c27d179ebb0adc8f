#pragma once

#include "ttmr/mlp.hpp"
#include "ttmr/tensor.hpp"
#include "ttmr/tt_tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ttmr {

struct Dataset {
    Matrix x;
    Vector y;
};

struct MackeyGlassSpec {
    double a = 0.2;
    double b = 0.1;
    double n = 10.0;
    double tau = 17.0;
    double dt = 1.0;
    double x0 = 1.2;
    std::size_t length = 1000;
    std::size_t discard = 100;
    double noise_sd = 0.0;
    bool scale = true;  // min-max onto [-1, 1] before the noise

    bool chaotic() const { return tau >= 17.0; }
};

/// RK4 on the delay equation with constant history x0; returns x(i*dt) for i = 0..steps.
/// Midpoint delayed values come from cubic Hermite interpolation on the stored grid.
std::vector<double> integrate_mackey_glass(const MackeyGlassSpec& spec, std::size_t steps);

/// Drop `discard` samples, keep `length`, optionally scale, then add N(0, noise_sd^2).
Vector mackey_glass(const MackeyGlassSpec& spec, std::uint64_t noise_seed = 0);

struct TeacherData {
    Dataset data;
    Mlp teacher;
};

/// Inputs Uniform[-1, 1], weights and biases N(0, weight_sd^2), raw targets.
TeacherData teacher_mlp_data(std::size_t inputs, std::size_t hidden, Activation act, std::size_t samples,
                             std::uint64_t seed, double weight_sd = 2.0);

struct PlantedData {
    Dataset data;
    TTTensor truth;
};

/// Targets produced exactly by a random TT with polynomial features; inputs Uniform[-1, 1].
PlantedData planted_tt_data(std::size_t order, std::size_t feature_dim, std::size_t rank_cap, std::size_t samples,
                            std::uint64_t seed, double noise_sd = 0.0);

struct WindowSpec {
    std::size_t delta = 6;
    std::size_t lags = 4;
    std::size_t horizon = 6;
};

struct Windows {
    Dataset data;
    std::vector<std::size_t> t;  // 0-based anchor index of each row
};

/// Row for anchor t: (x(t-(L-1)delta), ..., x(t-delta), x(t)); target x(t+h).
Windows build_windows(const Vector& series, const WindowSpec& w);

struct Split {
    std::vector<std::size_t> train, val, test;
};

Split split(std::size_t samples, double train_frac, double val_frac, std::uint64_t seed);
Split split(std::size_t samples, std::uint64_t seed);

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows);

struct CsvSeries {
    std::vector<std::string> dates;
    Vector values;
    std::size_t dropped = 0;
};

/// Header row required; column names matched case-insensitively. Rows with an empty or
/// "null" close are dropped and counted; other bad rows throw with the line number.
CsvSeries ingest_csv(const std::string& path, const std::string& date_col = "date",
                     const std::string& close_col = "close");

/// Scale a whole series onto [-1, 1].
Vector minmax_scale(const Vector& v);

void write_series_csv(const std::string& path, const Vector& values, const std::string& start_date = "2000-01-01");
void write_dataset_csv(const std::string& path, const Dataset& d);

}  // namespace ttmr
