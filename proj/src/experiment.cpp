#include "ttmr/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ttmr {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

ExperimentKind parse_experiment_kind(const std::string& s) {
    if (s == "recover-mlp") return ExperimentKind::recover_mlp;
    if (s == "mackey-glass") return ExperimentKind::mackey_glass;
    if (s == "csv-forecast") return ExperimentKind::csv_forecast;
    if (s == "planted-tt") return ExperimentKind::planted_tt;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::recover_mlp: return "recover-mlp";
        case ExperimentKind::mackey_glass: return "mackey-glass";
        case ExperimentKind::csv_forecast: return "csv-forecast";
        case ExperimentKind::planted_tt: return "planted-tt";
    }
    return "?";
}

std::size_t default_full_trials(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::recover_mlp: return 100;
        case ExperimentKind::mackey_glass: return 400;
        case ExperimentKind::csv_forecast: return 200;
        case ExperimentKind::planted_tt: return 100;
    }
    return 100;
}

std::size_t ModelSpec::coefficients(std::size_t inputs) const {
    if (family == ModelFamily::mlp) return mlp_param_count(inputs, hidden);
    const Shape dims(inputs, tt.map.dim);
    return param_count(dims, clamp_ranks(dims, tt.rank_cap));
}

std::string ModelSpec::describe() const {
    if (family == ModelFamily::tt) return fmt::format("TT(S={},R={})", tt.map.dim, tt.rank_cap);
    return fmt::format("MLP(H={},{},{})", hidden, to_string(activation), to_string(mlp.optimizer));
}

namespace {

using Keys = std::set<std::string>;

void check_keys(const pt::ptree& sec, const std::string& name, const Keys& allowed) {
    for (const auto& [k, v] : sec)
        if (!allowed.count(k)) throw std::invalid_argument("config: unknown key '" + k + "' in [" + name + "]");
}

template <class T>
T get(const pt::ptree& sec, const std::string& key, T fallback) {
    auto v = sec.get_optional<std::string>(key);
    if (!v) return fallback;
    std::istringstream is(*v);
    T out{};
    if (!(is >> out)) throw std::invalid_argument("config: cannot parse '" + key + "' = '" + *v + "'");
    return out;
}

bool get_bool(const pt::ptree& sec, const std::string& key, bool fallback) {
    auto v = sec.get_optional<std::string>(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("config: '" + key + "' must be true or false");
}

std::string get_str(const pt::ptree& sec, const std::string& key, const std::string& fallback) {
    return sec.get<std::string>(key, fallback);
}

const Keys experiment_keys{"kind", "trials", "full_trials", "seed", "data_seed", "output", "threads"};
const Keys data_keys{"length",  "discard", "noise",   "tau",         "dt",           "x0",         "a",
                     "b",       "n",       "delta",   "lags",        "horizon",      "inputs",     "hidden",
                     "activation", "samples", "weight_sd", "path", "date_column", "close_column", "order",
                     "feature_dim", "rank"};
const Keys tt_keys{"S",         "R",         "feature",  "lambda_lo", "lambda_hi",        "gss_iters",
                   "max_sweeps", "tol",      "patience", "lambda",    "orthogonalize_init", "early_stopping"};
const Keys mlp_keys{"hidden",     "activation", "optimizer",  "max_epochs", "learning_rate", "lr_lo",
                    "lr_hi",      "lr_gss_iters", "search_epochs", "alpha", "beta1",       "beta2",
                    "eps",        "debias",     "tol",        "patience",   "early_stopping"};

ModelSpec parse_tt(const pt::ptree& sec, const std::string& name) {
    check_keys(sec, name, tt_keys);
    ModelSpec m;
    m.family = ModelFamily::tt;
    const auto kind = parse_feature_kind(get_str(sec, "feature", "polynomial"));
    const auto s = get<std::size_t>(sec, "S", 2);
    m.tt.map = kind == FeatureKind::exponential ? FeatureMap::exponential() : FeatureMap::polynomial(s);
    m.tt.rank_cap = get<std::size_t>(sec, "R", 2);
    m.tt.lambda_lo = get<int>(sec, "lambda_lo", -10);
    m.tt.lambda_hi = get<int>(sec, "lambda_hi", 10);
    m.tt.gss_iters = get<int>(sec, "gss_iters", 20);
    m.tt.max_sweeps = get<std::size_t>(sec, "max_sweeps", 12);
    m.tt.tol = get<double>(sec, "tol", 1e-6);
    m.tt.patience_fraction = get<double>(sec, "patience", 0.2);
    m.tt.orthogonalize_init = get_bool(sec, "orthogonalize_init", true);
    m.tt.early_stopping = get_bool(sec, "early_stopping", true);
    if (sec.get_optional<std::string>("lambda")) m.tt.fixed_lambda = get<double>(sec, "lambda", 0.0);
    if (m.tt.rank_cap < 1 || m.tt.max_sweeps < 1) throw std::invalid_argument("config: [" + name + "] needs R, max_sweeps >= 1");
    return m;
}

ModelSpec parse_mlp(const pt::ptree& sec, const std::string& name) {
    check_keys(sec, name, mlp_keys);
    ModelSpec m;
    m.family = ModelFamily::mlp;
    m.hidden = get<std::size_t>(sec, "hidden", 4);
    m.activation = parse_activation(get_str(sec, "activation", "relu"));
    auto& c = m.mlp;
    c.optimizer = parse_optimizer(get_str(sec, "optimizer", "sgd"));
    c.max_epochs = get<std::size_t>(sec, "max_epochs", 2000);
    if (sec.get_optional<std::string>("learning_rate")) c.learning_rate = get<double>(sec, "learning_rate", 0.0);
    c.lr_lo = get<int>(sec, "lr_lo", c.lr_lo);
    c.lr_hi = get<int>(sec, "lr_hi", c.lr_hi);
    c.lr_gss_iters = get<int>(sec, "lr_gss_iters", c.lr_gss_iters);
    c.search_epochs = get<std::size_t>(sec, "search_epochs", c.search_epochs);
    c.adam_alpha = get<double>(sec, "alpha", c.adam_alpha);
    c.adam_beta1 = get<double>(sec, "beta1", c.adam_beta1);
    c.adam_beta2 = get<double>(sec, "beta2", c.adam_beta2);
    c.adam_eps = get<double>(sec, "eps", c.adam_eps);
    c.adam_debias = get_bool(sec, "debias", false);
    c.tol = get<double>(sec, "tol", c.tol);
    c.patience_fraction = get<double>(sec, "patience", c.patience_fraction);
    c.early_stopping = get_bool(sec, "early_stopping", true);
    if (m.hidden < 1 || c.max_epochs < 1) throw std::invalid_argument("config: [" + name + "] needs hidden, max_epochs >= 1");
    return m;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
    pt::ptree root;
    std::istringstream is(text);
    try {
        pt::read_ini(is, root);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.source_text = text;
    const pt::ptree empty;
    const auto& ex = root.get_child("experiment", empty);
    const auto& da = root.get_child("data", empty);
    check_keys(ex, "experiment", experiment_keys);
    check_keys(da, "data", data_keys);

    cfg.kind = parse_experiment_kind(get_str(ex, "kind", "mackey-glass"));
    cfg.trials = get<std::size_t>(ex, "trials", 20);
    cfg.full_trials = get<std::size_t>(ex, "full_trials", 0);
    cfg.seed = get<std::uint64_t>(ex, "seed", 1);
    cfg.data_seed = get<std::uint64_t>(ex, "data_seed", cfg.seed);
    cfg.out_dir = get_str(ex, "output", "out");
    cfg.threads = get<std::size_t>(ex, "threads", 0);
    if (cfg.trials < 1) throw std::invalid_argument("config: trials must be >= 1");

    auto& mg = cfg.mg;
    mg.length = get<std::size_t>(da, "length", mg.length);
    mg.discard = get<std::size_t>(da, "discard", mg.discard);
    mg.noise_sd = get<double>(da, "noise", mg.noise_sd);
    mg.tau = get<double>(da, "tau", mg.tau);
    mg.dt = get<double>(da, "dt", mg.dt);
    mg.x0 = get<double>(da, "x0", mg.x0);
    mg.a = get<double>(da, "a", mg.a);
    mg.b = get<double>(da, "b", mg.b);
    mg.n = get<double>(da, "n", mg.n);
    const bool csv = cfg.kind == ExperimentKind::csv_forecast;
    cfg.window.delta = get<std::size_t>(da, "delta", csv ? 1 : 6);
    cfg.window.lags = get<std::size_t>(da, "lags", 4);
    cfg.window.horizon = get<std::size_t>(da, "horizon", csv ? 1 : 6);

    cfg.teacher_inputs = get<std::size_t>(da, "inputs", cfg.teacher_inputs);
    cfg.teacher_hidden = get<std::size_t>(da, "hidden", cfg.teacher_hidden);
    cfg.teacher_activation = parse_activation(get_str(da, "activation", "tanh"));
    cfg.samples = get<std::size_t>(da, "samples", cfg.kind == ExperimentKind::planted_tt ? 2000 : 10000);
    cfg.teacher_sd = get<double>(da, "weight_sd", cfg.teacher_sd);

    cfg.csv_path = get_str(da, "path", "");
    cfg.date_column = get_str(da, "date_column", "date");
    cfg.close_column = get_str(da, "close_column", "close");
    if (csv) {
        if (cfg.csv_path.empty()) throw std::invalid_argument("config: csv-forecast needs data.path");
        fs::path p(cfg.csv_path);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        if (!fs::exists(p)) throw std::invalid_argument("config: data file " + p.string() + " does not exist");
        cfg.csv_path = p.string();
    }

    cfg.planted_order = get<std::size_t>(da, "order", cfg.planted_order);
    cfg.planted_dim = get<std::size_t>(da, "feature_dim", cfg.planted_dim);
    cfg.planted_rank = get<std::size_t>(da, "rank", cfg.planted_rank);
    cfg.planted_noise = csv || cfg.kind != ExperimentKind::planted_tt ? 0.0 : get<double>(da, "noise", 0.0);

    for (const auto& [sec_name, sec] : root) {
        if (sec_name == "experiment" || sec_name == "data") continue;
        const auto dot = sec_name.find('.');
        const std::string fam = sec_name.substr(0, dot);
        ModelSpec m;
        if (fam == "tt")
            m = parse_tt(sec, sec_name);
        else if (fam == "mlp")
            m = parse_mlp(sec, sec_name);
        else
            throw std::invalid_argument("config: unknown section [" + sec_name + "]");
        if (dot != std::string::npos) {
            m.name = sec_name.substr(dot + 1);
        } else if (m.family == ModelFamily::tt) {
            m.name = fmt::format("tt_S{}_R{}", m.tt.map.dim, m.tt.rank_cap);
        } else {
            m.name = fmt::format("mlp_H{}_{}", m.hidden, to_string(m.activation));
        }
        for (const auto& other : cfg.models)
            if (other.name == m.name) throw std::invalid_argument("config: duplicate model name '" + m.name + "'");
        cfg.models.push_back(std::move(m));
    }
    if (cfg.models.empty()) throw std::invalid_argument("config: no model sections");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

Dataset build_dataset(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::mackey_glass:
            return build_windows(mackey_glass(cfg.mg, cfg.data_seed), cfg.window).data;
        case ExperimentKind::recover_mlp:
            return teacher_mlp_data(cfg.teacher_inputs, cfg.teacher_hidden, cfg.teacher_activation, cfg.samples,
                                    cfg.data_seed, cfg.teacher_sd)
                .data;
        case ExperimentKind::csv_forecast: {
            const auto s = ingest_csv(cfg.csv_path, cfg.date_column, cfg.close_column);
            return build_windows(minmax_scale(s.values), cfg.window).data;
        }
        case ExperimentKind::planted_tt:
            return planted_tt_data(cfg.planted_order, cfg.planted_dim, cfg.planted_rank, cfg.samples, cfg.data_seed,
                                   cfg.planted_noise)
                .data;
    }
    throw std::logic_error("build_dataset: unhandled kind");
}

TrialSeeds trial_seeds(std::uint64_t base, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::array<std::uint32_t, 4> v{};
    seq.generate(v.begin(), v.end());
    return {(std::uint64_t{v[0]} << 32) | v[1], (std::uint64_t{v[2]} << 32) | v[3]};
}

TrialRecord run_trial(const ExperimentConfig& cfg, const Dataset& data, std::size_t model, std::size_t trial) {
    TrialRecord rec;
    rec.trial = trial;
    rec.model = model;
    rec.seeds = trial_seeds(cfg.seed, trial);
    const ModelSpec& spec = cfg.models.at(model);
    try {
        const Split sp = split(static_cast<std::size_t>(data.y.size()), rec.seeds.split);
        const Dataset tr = take_rows(data, sp.train), va = take_rows(data, sp.val), te = take_rows(data, sp.test);
        rec.scaler = scaler_fit(tr.x);
        const Matrix xt = rec.scaler.apply(tr.x), xv = rec.scaler.apply(va.x), xs = rec.scaler.apply(te.x);
        std::array<Vector, 3> pred;
        if (spec.family == ModelFamily::tt) {
            TrainConfig tc = spec.tt;
            tc.seed = rec.seeds.init;
            auto res = fit(xt, tr.y, xv, va.y, tc);
            pred = {predict(res.tt, tc.map, xt), predict(res.tt, tc.map, xv), predict(res.tt, tc.map, xs)};
            rec.report = std::move(res.report);
            rec.tt = std::move(res.tt);
        } else {
            MlpTrainConfig mc = spec.mlp;
            mc.seed = rec.seeds.init;
            auto res = train_mlp(spec.hidden, spec.activation, xt, tr.y, xv, va.y, mc);
            pred = {forward(res.net, xt), forward(res.net, xv), forward(res.net, xs)};
            rec.report = std::move(res.report);
            rec.learning_rate = res.learning_rate;
        }
        const std::array<const Vector*, 3> ys{&tr.y, &va.y, &te.y};
        for (std::size_t s = 0; s < 3; ++s) {
            if (!pred[s].allFinite()) throw std::runtime_error("non-finite predictions");
            rec.metrics[s] = evaluate(*ys[s], pred[s]);
        }
        if (rec.report.aborted) {
            rec.aborted = true;
            rec.error = "training diverged";
        }
        rec.x_train = xt;
        rec.y_train = tr.y;
    } catch (const std::exception& e) {
        rec.aborted = true;
        rec.error = e.what();
    }
    return rec;
}

Stat aggregate(const std::vector<double>& v) {
    std::vector<double> ok;
    for (double x : v)
        if (std::isfinite(x)) ok.push_back(x);
    Stat s;
    if (ok.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    double sum = 0.0;
    for (double x : ok) sum += x;
    s.mean = sum / static_cast<double>(ok.size());
    if (ok.size() > 1) {
        double ss = 0.0;
        for (double x : ok) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(ok.size() - 1));
    }
    return s;
}

std::string git_blob_sha1(const std::string& content) {
    const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("sha1 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

std::vector<std::string> budget_warnings(const ExperimentConfig& cfg, std::size_t inputs) {
    std::vector<std::string> out;
    for (const auto& t : cfg.models) {
        if (t.family != ModelFamily::tt) continue;
        const double ct = static_cast<double>(t.coefficients(inputs));
        const ModelSpec* best = nullptr;
        double best_gap = std::numeric_limits<double>::infinity();
        for (const auto& m : cfg.models) {
            if (m.family != ModelFamily::mlp) continue;
            const double gap = std::abs(static_cast<double>(m.coefficients(inputs)) - ct) / ct;
            if (gap < best_gap) {
                best_gap = gap;
                best = &m;
            }
        }
        if (best && best_gap > 0.05)
            out.push_back(fmt::format("coefficient budgets differ by {:.1f}%: {} has {}, closest {} has {}",
                                      100.0 * best_gap, t.name, t.coefficients(inputs), best->name,
                                      best->coefficients(inputs)));
    }
    return out;
}

namespace {

const std::array<const char*, 3> split_names{"train", "val", "test"};
const std::array<const char*, 4> metric_names{"mse", "score", "spcc", "r2"};

double metric_at(const MetricReport& m, std::size_t i) {
    switch (i) {
        case 0: return m.mse;
        case 1: return m.score;
        case 2: return m.spcc;
        default: return m.r_squared;
    }
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

void write_file(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << s;
}

std::string summary_csv(const ExperimentConfig& cfg, const std::vector<ModelSummary>& sums) {
    std::string s = "model,spec,coeffs,trials,aborted";
    for (auto sp : split_names)
        for (auto m : metric_names) s += fmt::format(",{0}_{1}_mean,{0}_{1}_std", sp, m);
    s += ",test_slope_mean,test_slope_std,test_intercept_mean,test_intercept_std,iterations_mean,iterations_std\n";
    for (std::size_t i = 0; i < sums.size(); ++i) {
        const auto& m = sums[i];
        s += fmt::format("{},\"{}\",{},{},{}", cfg.models[i].name, cfg.models[i].describe(), m.coefficients, m.completed,
                         m.aborted);
        for (std::size_t sp = 0; sp < 3; ++sp)
            for (std::size_t k = 0; k < 4; ++k) s += "," + num(m.metric[sp][k].mean) + "," + num(m.metric[sp][k].sd);
        s += "," + num(m.slope.mean) + "," + num(m.slope.sd) + "," + num(m.intercept.mean) + "," + num(m.intercept.sd);
        s += "," + num(m.iterations.mean) + "," + num(m.iterations.sd) + "\n";
    }
    return s;
}

std::string trials_csv(const ExperimentConfig& cfg, const std::vector<TrialRecord>& recs) {
    std::string s = "trial,model,split_seed,init_seed,aborted,iterations,best_iteration,stop_iteration,learning_rate";
    for (auto sp : split_names)
        for (auto m : metric_names) s += fmt::format(",{}_{}", sp, m);
    s += ",test_slope,test_intercept,error\n";
    for (const auto& r : recs) {
        s += fmt::format("{},{},{},{},{},{},{},{},{}", r.trial, cfg.models[r.model].name, r.seeds.split, r.seeds.init,
                         r.aborted ? 1 : 0, r.report.iterations, r.report.best_iteration, r.report.stop_iteration,
                         num(r.learning_rate));
        for (std::size_t sp = 0; sp < 3; ++sp)
            for (std::size_t k = 0; k < 4; ++k) s += "," + num(metric_at(r.metrics[sp], k));
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        s += "," + num(r.metrics[test_split].fit_slope) + "," + num(r.metrics[test_split].fit_intercept) + "," + err + "\n";
    }
    return s;
}

// Mean train/val loss per sweep or epoch; finished runs hold their last value.
std::string convergence_csv(const std::vector<const TrialRecord*>& recs) {
    std::size_t len = 0;
    for (auto* r : recs) len = std::max(len, r->report.val_loss.size());
    std::string s = "iteration,train_mse_mean,val_mse_mean\n";
    for (std::size_t i = 0; i < len; ++i) {
        std::vector<double> tr, va;
        for (auto* r : recs) {
            const auto& t = r->report.train_loss;
            const auto& v = r->report.val_loss;
            if (t.empty()) continue;
            tr.push_back(t[std::min(i, t.size() - 1)]);
            va.push_back(v[std::min(i, v.size() - 1)]);
        }
        s += fmt::format("{},{},{}\n", i + 1, num(aggregate(tr).mean), num(aggregate(va).mean));
    }
    return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = build_dataset(cfg);
    const std::size_t inputs = static_cast<std::size_t>(data.x.cols());
    const std::size_t nm = cfg.models.size(), total = cfg.trials * nm;

    ExperimentResult res;
    res.records.resize(total);
    std::vector<double> wall(total, 0.0);
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, total);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < total;) {
            const auto ts = std::chrono::steady_clock::now();
            res.records[i] = run_trial(cfg, data, i % nm, i / nm);
            wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ts).count();
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    res.summaries.resize(nm);
    std::size_t aborted = 0;
    for (std::size_t m = 0; m < nm; ++m) {
        auto& sum = res.summaries[m];
        sum.coefficients = cfg.models[m].coefficients(inputs);
        std::array<std::array<std::vector<double>, 4>, 3> vals;
        std::vector<double> slope, icpt, iters;
        for (const auto& r : res.records) {
            if (r.model != m) continue;
            if (r.aborted) {
                ++sum.aborted;
                spdlog::warn("trial {} of {} aborted: {}", r.trial, cfg.models[m].name, r.error);
                continue;
            }
            ++sum.completed;
            for (std::size_t sp = 0; sp < 3; ++sp)
                for (std::size_t k = 0; k < 4; ++k) vals[sp][k].push_back(metric_at(r.metrics[sp], k));
            slope.push_back(r.metrics[test_split].fit_slope);
            icpt.push_back(r.metrics[test_split].fit_intercept);
            iters.push_back(static_cast<double>(r.report.iterations));
        }
        for (std::size_t sp = 0; sp < 3; ++sp)
            for (std::size_t k = 0; k < 4; ++k) sum.metric[sp][k] = aggregate(vals[sp][k]);
        sum.slope = aggregate(slope);
        sum.intercept = aggregate(icpt);
        sum.iterations = aggregate(iters);
        aborted += sum.aborted;
    }
    res.warnings = budget_warnings(cfg, inputs);

    const fs::path out(cfg.out_dir);
    fs::create_directories(out / "traces");
    fs::create_directories(out / "models");
    fs::create_directories(out / "convergence");
    const std::string summary = summary_csv(cfg, res.summaries);
    write_file(out / "summary.csv", summary);
    write_file(out / "trials.csv", trials_csv(cfg, res.records));
    for (std::size_t m = 0; m < nm; ++m) {
        std::vector<const TrialRecord*> ok;
        for (const auto& r : res.records)
            if (r.model == m && !r.aborted) ok.push_back(&r);
        write_file(out / "convergence" / (cfg.models[m].name + ".csv"), convergence_csv(ok));
    }
    for (const auto& r : res.records) {
        const std::string stem = fmt::format("{}_trial{:03d}", cfg.models[r.model].name, r.trial);
        std::ostringstream os;
        write_trace(r.report, os);
        write_file(out / "traces" / (stem + ".csv"), os.str());
        if (r.tt) save_tt(*r.tt, (out / "models" / (stem + ".tt")).string());
    }

    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::ordered_json man;
    man["kind"] = to_string(cfg.kind);
    man["config_sha1"] = git_blob_sha1(cfg.source_text);
    man["config"] = cfg.source_text;
    man["trials"] = cfg.trials;
    man["seed"] = cfg.seed;
    man["data_seed"] = cfg.data_seed;
    man["threads"] = threads;
    man["samples"] = data.y.size();
    man["inputs"] = inputs;
    man["summary_sha1"] = git_blob_sha1(summary);
    man["aborted_trials"] = aborted;
    man["warnings"] = res.warnings;
    auto& models = man["models"];
    for (std::size_t m = 0; m < nm; ++m)
        models.push_back({{"name", cfg.models[m].name},
                          {"spec", cfg.models[m].describe()},
                          {"coefficients", res.summaries[m].coefficients}});
    man["wall_seconds_total"] = res.wall_seconds;
    man["wall_seconds_per_trial"] = wall;
    write_file(out / "manifest.json", man.dump(2) + "\n");

    for (const auto& w : res.warnings) spdlog::warn("{}", w);
    if (static_cast<double>(aborted) > 0.1 * static_cast<double>(total))
        throw std::runtime_error(fmt::format("{} of {} trials aborted (limit 10%)", aborted, total));
    return res;
}

ExperimentResult compare_experiment(const ExperimentConfig& cfg) {
    ExperimentResult res = run_experiment(cfg);
    std::string s = "split,metric";
    for (const auto& m : cfg.models) s += "," + m.name;
    s += ",winner\n";
    s += "-,coeffs";
    for (const auto& sum : res.summaries) s += "," + std::to_string(sum.coefficients);
    s += ",-\n";
    for (std::size_t sp = 0; sp < 3; ++sp)
        for (std::size_t k = 0; k < 4; ++k) {
            s += fmt::format("{},{}", split_names[sp], metric_names[k]);
            std::size_t win = 0;
            bool any = false;
            for (std::size_t m = 0; m < res.summaries.size(); ++m) {
                const double v = res.summaries[m].metric[sp][k].mean;
                s += "," + num(v);
                if (!std::isfinite(v)) continue;
                const double w = res.summaries[win].metric[sp][k].mean;
                if (!any || !std::isfinite(w) || (k == 0 ? v < w : v > w)) win = m;
                any = true;
            }
            s += "," + (any ? cfg.models[win].name : std::string("-")) + "\n";
        }
    write_file(fs::path(cfg.out_dir) / "compare.csv", s);
    return res;
}

}  // namespace ttmr
