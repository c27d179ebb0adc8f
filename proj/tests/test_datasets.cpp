#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "ttmr/datasets.hpp"
#include "ttmr/tt_regressor.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

using namespace ttmr;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const fs::path p = fs::temp_directory_path() / ("ttmr_test_" + name);
    std::ofstream(p) << body;
    return p.string();
}

MackeyGlassSpec raw_spec(double dt) {
    MackeyGlassSpec s;
    s.dt = dt;
    s.scale = false;
    return s;
}

}  // namespace

TEST_CASE("mackey-glass with a = 0 is pure decay") {
    MackeyGlassSpec s = raw_spec(1.0);
    s.a = 0.0;
    const auto x = integrate_mackey_glass(s, 10);
    CHECK(x.size() == 11);
    CHECK(x[0] == 1.2);
    CHECK(std::abs(x[10] - 1.2 * std::exp(-1.0)) <= 1e-6);
}

TEST_CASE("mackey-glass RK4 self-convergence") {
    const std::size_t t = 100;
    auto at = [&](double dt) {
        const auto x = integrate_mackey_glass(raw_spec(dt), std::size_t(std::llround(t / dt)));
        return x.back();
    };
    const double ref = at(0.0625);
    const double e1 = std::abs(at(1.0) - ref), e2 = std::abs(at(0.5) - ref), e4 = std::abs(at(0.25) - ref);
    MESSAGE("errors " << e1 << " " << e2 << " " << e4);
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 24.0);
    CHECK(e2 / e4 > 10.0);
    CHECK(e2 / e4 < 24.0);
}

TEST_CASE("mackey-glass series") {
    MackeyGlassSpec s;
    CHECK(s.chaotic());
    const Vector x = mackey_glass(s);
    CHECK(x.size() == 1000);
    CHECK(x == mackey_glass(s));
    CHECK(x.maxCoeff() == doctest::Approx(1.0));
    CHECK(x.minCoeff() == doctest::Approx(-1.0));
    SUBCASE("bounded unscaled") {
        MackeyGlassSpec r = s;
        r.scale = false;
        const Vector u = mackey_glass(r);
        CHECK(u.minCoeff() > 0.0);
        CHECK(u.maxCoeff() < 2.0);
    }
    SUBCASE("no period within 1e-6") {
        for (Eigen::Index p = 1; p < 500; ++p)
            CHECK((x.head(1000 - p) - x.tail(1000 - p)).cwiseAbs().maxCoeff() > 1e-6);
    }
    SUBCASE("noise is seeded and additive") {
        MackeyGlassSpec n = s;
        n.noise_sd = 0.1;
        const Vector a = mackey_glass(n, 5), b = mackey_glass(n, 5), c = mackey_glass(n, 6);
        CHECK(a == b);
        CHECK(a != c);
        const Vector e = a - x;
        CHECK(std::abs(e.mean()) < 0.02);
        CHECK(std::sqrt((e.array() - e.mean()).square().sum() / 999) == doctest::Approx(0.1).epsilon(0.1));
    }
    MackeyGlassSpec calm = s;
    calm.tau = 10;
    CHECK_FALSE(calm.chaotic());
}

TEST_CASE("teacher data") {
    const auto a = teacher_mlp_data(10, 200, Activation::relu, 2000, 3);
    CHECK(a.teacher.param_count() == 2401);
    CHECK(a.data.x.rows() == 2000);
    CHECK(a.data.x.cols() == 10);
    CHECK(a.data.x.cwiseAbs().maxCoeff() <= 1.0);
    CHECK((forward(a.teacher, a.data.x) - a.data.y).norm() == 0.0);
    const auto b = teacher_mlp_data(10, 200, Activation::relu, 2000, 3);
    CHECK(a.data.y == b.data.y);
    CHECK(a.teacher.params() == b.teacher.params());
    SUBCASE("weight statistics") {
        const Vector& p = a.teacher.params();
        const double mean = p.mean();
        const double sd = std::sqrt((p.array() - mean).square().sum() / double(p.size() - 1));
        CHECK(std::abs(mean) < 0.15);
        CHECK(sd == doctest::Approx(2.0).epsilon(0.05));
    }
    SUBCASE("about half of the ReLU pre-activations are negative") {
        const Matrix z = (a.data.x * a.teacher.w1().transpose()).rowwise() + a.teacher.b1().transpose();
        const double frac = double((z.array() < 0).count()) / double(z.size());
        CHECK(frac == doctest::Approx(0.5).epsilon(0.1));
    }
}

TEST_CASE("windows") {
    Vector series(100);
    for (Eigen::Index i = 0; i < 100; ++i) series(i) = double(i + 1);  // value = 1-based index
    SUBCASE("delta 6, horizon 6: first anchor is the 19th sample") {
        const auto w = build_windows(series, {6, 4, 6});
        CHECK(w.t.front() == 18);
        CHECK(w.data.x.row(0) == Eigen::RowVector4d(1, 7, 13, 19));
        CHECK(w.data.y(0) == 25);
        CHECK(w.t.back() == 93);
        CHECK(w.data.x.rows() == 76);
        for (std::size_t r = 0; r < w.t.size(); ++r) {
            CHECK(w.data.y(Eigen::Index(r)) == series(Eigen::Index(w.t[r] + 6)));
            CHECK(w.data.x(Eigen::Index(r), 3) == series(Eigen::Index(w.t[r])));
        }
    }
    SUBCASE("delta 1, horizon 1 is a one-step AR(4) window") {
        const auto w = build_windows(series, {1, 4, 1});
        CHECK(w.data.x.row(0) == Eigen::RowVector4d(1, 2, 3, 4));
        CHECK(w.data.y(0) == 5);
        CHECK(w.data.x.rows() == 96);
    }
    SUBCASE("constant series") {
        const auto w = build_windows(Vector::Constant(40, 0.3), {6, 4, 6});
        CHECK((w.data.x.array() == 0.3).all());
        CHECK((w.data.y.array() == 0.3).all());
    }
    CHECK_THROWS_AS(build_windows(series.head(24), {6, 4, 6}), std::invalid_argument);
    CHECK_NOTHROW(build_windows(series.head(25), {6, 4, 6}));
}

TEST_CASE("split") {
    const auto s = split(10, 1);
    CHECK(s.train.size() == 6);
    CHECK(s.val.size() == 2);
    CHECK(s.test.size() == 2);
    for (std::size_t m : {10u, 57u, 1000u}) {
        const auto p = split(m, 4);
        std::vector<std::size_t> all = p.train;
        all.insert(all.end(), p.val.begin(), p.val.end());
        all.insert(all.end(), p.test.begin(), p.test.end());
        std::sort(all.begin(), all.end());
        CHECK(all.size() == m);
        for (std::size_t i = 0; i < m; ++i) CHECK(all[i] == i);
    }
    CHECK(split(1000, 4).train == split(1000, 4).train);
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t seed = 0; seed < 20; ++seed) seen.insert(split(1000, seed).train);
    CHECK(seen.size() == 20);
    CHECK_THROWS_AS(split(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(split(100, 0.7, 0.4, 1), std::invalid_argument);
}

TEST_CASE("csv ingestion") {
    SUBCASE("two rows") {
        const auto c = ingest_csv(write_temp("two.csv", "date,close\n2020-01-02,10.5\n2020-01-03,11\n"));
        CHECK(c.values.size() == 2);
        CHECK(c.values(1) == 11.0);
        CHECK(c.dropped == 0);
    }
    SUBCASE("shuffled dates come back sorted") {
        const auto c = ingest_csv(
            write_temp("shuf.csv", "date,close\n2020-03-01,3\n2020-01-01,1\n2021-01-01,4\n2020-02-01,2\n"));
        CHECK(c.dates == std::vector<std::string>{"2020-01-01", "2020-02-01", "2020-03-01", "2021-01-01"});
        CHECK(c.values == Eigen::Vector4d(1, 2, 3, 4));
    }
    SUBCASE("missing close is dropped and counted") {
        const auto c = ingest_csv(write_temp("gap.csv", "Date,Close\n2020-01-01,1\n2020-01-02,null\n2020-01-03,3\n2020-01-06,\n"));
        CHECK(c.values.size() == 2);
        CHECK(c.dropped == 2);
    }
    SUBCASE("column names are case-insensitive and overridable") {
        const auto c = ingest_csv(write_temp("cols.csv", "Day,Open,Adj Close\n2020-01-01,1,1.5\n2020-01-02,2,2.5\n"), "day",
                                  "adj close");
        CHECK(c.values == Eigen::Vector2d(1.5, 2.5));
    }
    SUBCASE("errors carry line numbers") {
        auto message = [](const std::string& path) {
            try {
                ingest_csv(path);
            } catch (const std::exception& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        CHECK(message(write_temp("bad1.csv", "date,close\n2020-01-01,1\n2020-01-02,abc\n")).find("line 3") != std::string::npos);
        CHECK(message(write_temp("bad2.csv", "date,close\n2020-13-01,1\n")).find("line 2") != std::string::npos);
        CHECK(message(write_temp("bad3.csv", "date,close\n2020-01-01,1,7\n")).find("line 2") != std::string::npos);
        CHECK_FALSE(message(write_temp("bad4.csv", "when,close\n2020-01-01,1\n")).empty());
        CHECK_FALSE(message("/nonexistent/file.csv").empty());
    }
    SUBCASE("bundled daily file") {
        const auto c = ingest_csv(std::string(TTMR_TEST_DATA) + "/daily_close.csv");
        CHECK(c.values.size() == 320);
        CHECK(std::is_sorted(c.dates.begin(), c.dates.end()));
        CHECK(c.values.minCoeff() > 0);
    }
    SUBCASE("generated series read back") {
        const Vector v = Vector::LinSpaced(5, -1, 1);
        const std::string p = (fs::temp_directory_path() / "ttmr_test_roundtrip.csv").string();
        write_series_csv(p, v);
        const auto c = ingest_csv(p);
        CHECK(c.dates.front() == "2000-01-01");
        CHECK(c.dates.back() == "2000-01-05");
        CHECK((c.values - v).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("minmax scale") {
    const Vector v = minmax_scale(Eigen::Vector3d(2, 4, 10));
    CHECK(v == Eigen::Vector3d(-1, -0.5, 1));
    CHECK_THROWS(minmax_scale(Vector::Ones(3)));
}

TEST_CASE("planted data") {
    const auto p = planted_tt_data(4, 3, 2, 50, 8);
    CHECK(p.truth.ranks() == std::vector<std::size_t>{1, 2, 2, 2, 1});
    CHECK((predict(p.truth, FeatureMap::polynomial(3), p.data.x) - p.data.y).norm() == 0.0);
}
