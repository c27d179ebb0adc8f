#include "ttmr/experiment.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <optional>

namespace {

struct RunFlags {
    std::string config;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads;
    bool full = false;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
    app->add_option("config", f.config, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    app->add_option("--trials", f.trials, "Monte-Carlo trials (overrides config)");
    app->add_option("--seed", f.seed, "Base seed for splits and initialization");
    app->add_option("--out", f.out, "Output directory");
    app->add_option("--threads", f.threads, "Worker threads (default: all cores)");
    app->add_flag("--full", f.full, "Use the full trial count for the experiment kind");
}

ttmr::ExperimentConfig resolve(const RunFlags& f) {
    auto cfg = ttmr::load_config(f.config);
    if (f.full) cfg.trials = cfg.full_trials ? cfg.full_trials : ttmr::default_full_trials(cfg.kind);
    if (f.trials) cfg.trials = *f.trials;
    if (f.seed) cfg.seed = *f.seed;
    if (f.out) cfg.out_dir = *f.out;
    if (f.threads) cfg.threads = *f.threads;
    if (cfg.trials < 1) throw std::invalid_argument("--trials must be >= 1");
    return cfg;
}

void print_summary(const ttmr::ExperimentConfig& cfg, const ttmr::ExperimentResult& res) {
    fmt::print("{} | {} trial(s) | output {}\n", ttmr::to_string(cfg.kind), cfg.trials, cfg.out_dir);
    for (std::size_t m = 0; m < cfg.models.size(); ++m) {
        const auto& s = res.summaries[m];
        fmt::print("{} {}: no. of coeffs. = {}\n", cfg.models[m].name, cfg.models[m].describe(), s.coefficients);
        const char* names[] = {"train", "val", "test"};
        for (std::size_t sp = 0; sp < 3; ++sp)
            fmt::print("  {:<5}  MSE {:.4e}  score {:.4f}  SPCC {:.4f}  R2 {:.4f}\n", names[sp], s.metric[sp][0].mean,
                       s.metric[sp][1].mean, s.metric[sp][2].mean, s.metric[sp][3].mean);
        fmt::print("  fit line (test): m = {:.4f}, b = {:.4f}; iterations {:.1f}; aborted {}\n", s.slope.mean,
                   s.intercept.mean, s.iterations.mean, s.aborted);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-train multilinear regression experiments"};
    app.require_subcommand(1);

    RunFlags run_flags, cmp_flags;
    auto* run = app.add_subcommand("run", "Run an experiment config");
    add_run_flags(run, run_flags);
    auto* cmp = app.add_subcommand("compare", "Run an experiment and tabulate the models side by side");
    add_run_flags(cmp, cmp_flags);

    auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
    gen->require_subcommand(1);
    std::string out_path = "data.csv";
    std::uint64_t gen_seed = 1;
    double noise = 0.0;
    std::size_t length = 1000, samples = 10000;
    std::string activation = "tanh";
    auto* mg = gen->add_subcommand("mackey-glass", "Mackey-Glass series (date,close)");
    mg->add_option("--out", out_path, "Output CSV");
    mg->add_option("--noise", noise, "Gaussian noise standard deviation");
    mg->add_option("--length", length, "Number of samples");
    mg->add_option("--seed", gen_seed, "Noise seed");
    auto* teacher = gen->add_subcommand("teacher", "Teacher-MLP regression data (x1..x10,y)");
    teacher->add_option("--out", out_path, "Output CSV");
    teacher->add_option("--activation", activation, "relu or tanh");
    teacher->add_option("--samples", samples, "Number of samples");
    teacher->add_option("--seed", gen_seed, "Seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = resolve(run_flags);
            print_summary(cfg, ttmr::run_experiment(cfg));
        } else if (*cmp) {
            const auto cfg = resolve(cmp_flags);
            const auto res = ttmr::compare_experiment(cfg);
            print_summary(cfg, res);
            fmt::print("comparison written to {}/compare.csv\n", cfg.out_dir);
        } else if (*mg) {
            ttmr::MackeyGlassSpec spec;
            spec.noise_sd = noise;
            spec.length = length;
            ttmr::write_series_csv(out_path, ttmr::mackey_glass(spec, gen_seed));
            fmt::print("wrote {} samples to {}\n", length, out_path);
        } else if (*teacher) {
            const auto d = ttmr::teacher_mlp_data(10, 200, ttmr::parse_activation(activation), samples, gen_seed);
            ttmr::write_dataset_csv(out_path, d.data);
            fmt::print("wrote {} samples to {}\n", samples, out_path);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
