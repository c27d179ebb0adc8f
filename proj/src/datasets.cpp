#include "ttmr/datasets.hpp"

#include "ttmr/tt_regressor.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ttmr {

std::vector<double> integrate_mackey_glass(const MackeyGlassSpec& sp, std::size_t steps) {
    const double h = sp.dt;
    if (!(h > 0.0)) throw std::invalid_argument("mackey_glass: dt must be positive");
    const double ratio = sp.tau / h;
    const auto d = static_cast<std::ptrdiff_t>(std::llround(ratio));
    if (d < 1 || std::abs(ratio - static_cast<double>(d)) > 1e-9)
        throw std::invalid_argument("mackey_glass: tau must be a positive integer multiple of dt");

    auto rhs = [&](double x, double xd) { return sp.a * xd / (1.0 + std::pow(xd, sp.n)) - sp.b * x; };

    std::vector<double> x(steps + 1), f(steps + 1);
    x[0] = sp.x0;
    auto xs = [&](std::ptrdiff_t j) { return j <= 0 ? sp.x0 : x[static_cast<std::size_t>(j)]; };
    f[0] = rhs(sp.x0, sp.x0);
    // Delayed value at the midpoint of [j, j+1]. The history is constant, so its slope is zero.
    auto mid = [&](std::ptrdiff_t j) {
        if (j < 0) return sp.x0;
        const double x0 = xs(j), x1 = xs(j + 1);
        const double f0 = f[static_cast<std::size_t>(j)], f1 = f[static_cast<std::size_t>(j + 1)];
        return 0.5 * (x0 + x1) + h * (f0 - f1) / 8.0;
    };

    for (std::size_t i = 0; i < steps; ++i) {
        const auto ii = static_cast<std::ptrdiff_t>(i);
        const double xi = x[i];
        const double xd0 = xs(ii - d), xdm = mid(ii - d), xd1 = xs(ii - d + 1);
        const double k1 = rhs(xi, xd0);
        const double k2 = rhs(xi + 0.5 * h * k1, xdm);
        const double k3 = rhs(xi + 0.5 * h * k2, xdm);
        const double k4 = rhs(xi + h * k3, xd1);
        x[i + 1] = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        f[i + 1] = rhs(x[i + 1], xs(ii + 1 - d));
    }
    return x;
}

Vector minmax_scale(const Vector& v) {
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    if (!(hi > lo)) throw std::domain_error("minmax_scale: constant series");
    return ((v.array() - lo) * (2.0 / (hi - lo)) - 1.0).matrix();
}

Vector mackey_glass(const MackeyGlassSpec& sp, std::uint64_t noise_seed) {
    if (sp.length == 0) throw std::invalid_argument("mackey_glass: length must be positive");
    const auto raw = integrate_mackey_glass(sp, sp.discard + sp.length - 1);
    Vector s = Eigen::Map<const Vector>(raw.data() + sp.discard, static_cast<Eigen::Index>(sp.length));
    if (sp.scale) s = minmax_scale(s);
    if (sp.noise_sd > 0.0) {
        std::mt19937_64 rng(noise_seed);
        std::normal_distribution<double> g(0.0, sp.noise_sd);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += g(rng);
    }
    return s;
}

TeacherData teacher_mlp_data(std::size_t inputs, std::size_t hidden, Activation act, std::size_t samples,
                             std::uint64_t seed, double weight_sd) {
    std::mt19937_64 rng(seed);
    Mlp net(inputs, hidden, act);
    std::normal_distribution<double> g(0.0, weight_sd);
    for (Eigen::Index i = 0; i < net.params().size(); ++i) net.params()(i) = g(rng);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(inputs));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    Vector y = forward(net, x);
    return {{std::move(x), std::move(y)}, std::move(net)};
}

PlantedData planted_tt_data(std::size_t order, std::size_t feature_dim, std::size_t rank_cap, std::size_t samples,
                            std::uint64_t seed, double noise_sd) {
    std::mt19937_64 rng(seed);
    TTTensor truth = random_init(Shape(order, feature_dim), rank_cap, rng());
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix x(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(order));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    Vector y = predict(truth, FeatureMap::polynomial(feature_dim), x);
    if (noise_sd > 0.0) {
        std::normal_distribution<double> g(0.0, noise_sd);
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += g(rng);
    }
    return {{std::move(x), std::move(y)}, std::move(truth)};
}

Windows build_windows(const Vector& series, const WindowSpec& w) {
    if (w.lags == 0 || w.delta == 0) throw std::invalid_argument("build_windows: lags and delta must be positive");
    const std::size_t len = static_cast<std::size_t>(series.size());
    const std::size_t first = (w.lags - 1) * w.delta;
    if (len <= first + w.horizon) throw std::invalid_argument("build_windows: series too short for the window");
    const std::size_t rows = len - first - w.horizon;
    Windows out;
    out.data.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(w.lags));
    out.data.y.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        for (std::size_t l = 0; l < w.lags; ++l)
            out.data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) =
                series(static_cast<Eigen::Index>(t - (w.lags - 1 - l) * w.delta));
        out.data.y(static_cast<Eigen::Index>(r)) = series(static_cast<Eigen::Index>(t + w.horizon));
        out.t.push_back(t);
    }
    return out;
}

Split split(std::size_t samples, double train_frac, double val_frac, std::uint64_t seed) {
    if (train_frac <= 0.0 || val_frac <= 0.0 || train_frac + val_frac >= 1.0)
        throw std::invalid_argument("split: fractions must be positive and leave room for a test split");
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(samples)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(samples)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= samples)
        throw std::invalid_argument("split: " + std::to_string(samples) + " samples leave an empty split");
    std::vector<std::size_t> idx(samples);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    Split s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

Split split(std::size_t samples, std::uint64_t seed) { return split(samples, 0.6, 0.2, seed); }

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), d.x.cols()), Vector(static_cast<Eigen::Index>(rows.size()))};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        out.x.row(static_cast<Eigen::Index>(i)) = d.x.row(r);
        out.y(static_cast<Eigen::Index>(i)) = d.y(r);
    }
    return out;
}

namespace {

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0 || c == '"'; };
    while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool valid_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const std::chrono::year_month_day ymd{std::chrono::year{std::stoi(s.substr(0, 4))},
                                          std::chrono::month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
                                          std::chrono::day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
    return ymd.ok();
}

}  // namespace

CsvSeries ingest_csv(const std::string& path, const std::string& date_col, const std::string& close_col) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("ingest_csv: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> header;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) {
            header = split_fields(line);
            break;
        }
    }
    if (header.empty()) throw std::runtime_error("ingest_csv: " + path + " has no header");
    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (lower(header[i]) == lower(name)) return i;
        throw std::runtime_error("ingest_csv: column '" + name + "' not found in " + path);
    };
    const std::size_t di = find_col(date_col), ci = find_col(close_col);

    std::vector<std::pair<std::string, double>> rows;
    std::size_t dropped = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw std::runtime_error(fmt::format("ingest_csv: line {} has {} fields, header has {}", lineno,
                                                 fields.size(), header.size()));
        const std::string& date = fields[di];
        if (!valid_iso_date(date))
            throw std::runtime_error(fmt::format("ingest_csv: line {}: bad date '{}'", lineno, date));
        const std::string& cell = fields[ci];
        const std::string lc = lower(cell);
        if (cell.empty() || lc == "null" || lc == "nan" || lc == "na") {
            ++dropped;
            continue;
        }
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw std::runtime_error(fmt::format("ingest_csv: line {}: cannot parse close value '{}'", lineno, cell));
        rows.emplace_back(date, v);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    CsvSeries out;
    out.values.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.dates.push_back(rows[i].first);
        out.values(static_cast<Eigen::Index>(i)) = rows[i].second;
    }
    out.dropped = dropped;
    if (dropped > 0) spdlog::warn("ingest_csv: dropped {} row(s) with missing close values from {}", dropped, path);
    return out;
}

void write_series_csv(const std::string& path, const Vector& values, const std::string& start_date) {
    if (!valid_iso_date(start_date)) throw std::invalid_argument("write_series_csv: bad start date");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_series_csv: cannot open " + path);
    using namespace std::chrono;
    sys_days day{year_month_day{year{std::stoi(start_date.substr(0, 4))},
                                month{static_cast<unsigned>(std::stoi(start_date.substr(5, 2)))},
                                std::chrono::day{static_cast<unsigned>(std::stoi(start_date.substr(8, 2)))}}};
    f << "date,close\n";
    for (Eigen::Index i = 0; i < values.size(); ++i, day += days{1}) {
        const year_month_day ymd{day};
        f << fmt::format("{:04d}-{:02d}-{:02d},{:.17g}\n", static_cast<int>(ymd.year()),
                         static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), values(i));
    }
}

void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    for (Eigen::Index j = 0; j < d.x.cols(); ++j) f << "x" << (j + 1) << ',';
    f << "y\n";
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.x.cols(); ++j) f << fmt::format("{:.17g},", d.x(i, j));
        f << fmt::format("{:.17g}\n", d.y(i));
    }
}

}  // namespace ttmr
