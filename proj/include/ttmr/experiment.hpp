#pragma once

#include "ttmr/datasets.hpp"
#include "ttmr/feature_map.hpp"
#include "ttmr/metrics.hpp"
#include "ttmr/mlp.hpp"
#include "ttmr/tt_regressor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttmr {

enum class ExperimentKind { recover_mlp, mackey_glass, csv_forecast, planted_tt };
ExperimentKind parse_experiment_kind(const std::string& s);
std::string to_string(ExperimentKind k);

enum class ModelFamily { tt, mlp };

struct ModelSpec {
    std::string name;
    ModelFamily family = ModelFamily::tt;
    TrainConfig tt;
    std::size_t hidden = 4;
    Activation activation = Activation::relu;
    MlpTrainConfig mlp;

    std::size_t coefficients(std::size_t inputs) const;
    std::string describe() const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::mackey_glass;
    std::size_t trials = 20;
    std::size_t full_trials = 0;  // 0 picks the default for the kind
    std::uint64_t seed = 1;
    std::uint64_t data_seed = 1;
    std::string out_dir = "out";
    std::size_t threads = 0;  // 0 = hardware concurrency

    MackeyGlassSpec mg;
    WindowSpec window;

    std::size_t teacher_inputs = 10;
    std::size_t teacher_hidden = 200;
    Activation teacher_activation = Activation::tanh;
    std::size_t samples = 10000;
    double teacher_sd = 2.0;

    std::string csv_path;
    std::string date_column = "date";
    std::string close_column = "close";

    std::size_t planted_order = 4;
    std::size_t planted_dim = 3;
    std::size_t planted_rank = 2;
    double planted_noise = 0.0;

    std::vector<ModelSpec> models;
    std::string source_text;
};

/// INI text: [experiment], [data], and one section per model named tt, tt.<name>, mlp or mlp.<name>.
/// Relative data paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
std::size_t default_full_trials(ExperimentKind k);

Dataset build_dataset(const ExperimentConfig& cfg);

struct TrialSeeds {
    std::uint64_t split;
    std::uint64_t init;
};

TrialSeeds trial_seeds(std::uint64_t base, std::size_t trial);

enum SplitId { train_split = 0, val_split = 1, test_split = 2 };

struct TrialRecord {
    std::size_t trial = 0;
    std::size_t model = 0;
    TrialSeeds seeds{};
    bool aborted = false;
    std::string error;
    std::array<MetricReport, 3> metrics{};
    FitReport report;
    double learning_rate = 0.0;
    std::optional<TTTensor> tt;
    Scaler scaler;
    Matrix x_train;  // scaled
    Vector y_train;
};

/// Split, scale, fit and score one model on one trial.
TrialRecord run_trial(const ExperimentConfig& cfg, const Dataset& data, std::size_t model, std::size_t trial);

struct Stat {
    double mean = 0.0;
    double sd = 0.0;
};

/// Mean and sample standard deviation (0 for a single value); NaN entries are skipped.
Stat aggregate(const std::vector<double>& v);

struct ModelSummary {
    std::size_t coefficients = 0;
    std::size_t completed = 0;
    std::size_t aborted = 0;
    std::array<std::array<Stat, 4>, 3> metric{};  // [split][mse, score, spcc, r2]
    Stat slope, intercept;                        // test split fit line
    Stat iterations;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;  // trial-major
    std::vector<ModelSummary> summaries;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

/// Runs every trial, writes summary.csv, trials.csv, traces/, models/, convergence/ and
/// manifest.json under cfg.out_dir. Throws after writing when more than 10% of trials abort.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// run_experiment plus compare.csv with per-metric winners and a coefficient-budget check.
ExperimentResult compare_experiment(const ExperimentConfig& cfg);

/// Pairs each TT spec with the MLP spec of closest size; warns beyond 5% mismatch.
std::vector<std::string> budget_warnings(const ExperimentConfig& cfg, std::size_t inputs);

std::string git_blob_sha1(const std::string& content);

}  // namespace ttmr
