#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ttmr/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ttmr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ttmr_exp_" + name);
    fs::remove_all(p);
    return p;
}

const char* small_mg = R"(
[experiment]
kind = mackey-glass
trials = 3
seed = 7
threads = 2

[data]
length = 300
delta = 6
horizon = 6

[tt.a]
S = 2
R = 2
max_sweeps = 4

[mlp.b]
hidden = 4
activation = relu
optimizer = sgd
learning_rate = 0.1
max_epochs = 50
)";

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(small_mg);
    CHECK(cfg.kind == ExperimentKind::mackey_glass);
    CHECK(cfg.trials == 3);
    CHECK(cfg.seed == 7);
    CHECK(cfg.mg.length == 300);
    CHECK(cfg.window.delta == 6);
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[0].name == "a");
    CHECK(cfg.models[0].family == ModelFamily::tt);
    CHECK(cfg.models[0].tt.rank_cap == 2);
    CHECK(cfg.models[0].tt.map.dim == 2);
    CHECK(cfg.models[0].tt.max_sweeps == 4);
    CHECK(cfg.models[0].coefficients(4) == 24);
    CHECK(cfg.models[1].family == ModelFamily::mlp);
    CHECK(cfg.models[1].coefficients(4) == 25);
    CHECK(*cfg.models[1].mlp.learning_rate == 0.1);

    CHECK_THROWS(parse_config("[experiment]\nkind = mackey-glass\ncolour = red\n[tt]\nS=2\nR=2\n"));
    CHECK_THROWS(parse_config("[experiment]\nkind = mackey-glass\n[bogus]\nx=1\n"));
    CHECK_THROWS(parse_config("[experiment]\nkind = weather\n[tt]\nS=2\nR=2\n"));
    CHECK_THROWS(parse_config("[experiment]\nkind = mackey-glass\ntrials = 0\n[tt]\nS=2\nR=2\n"));
    CHECK_THROWS(parse_config("[experiment]\nkind = mackey-glass\n"));
    CHECK_THROWS(parse_config("[experiment]\nkind = csv-forecast\n[data]\npath = nope.csv\n[tt]\nS=2\nR=2\n"));
    const auto csv = parse_config("[experiment]\nkind = csv-forecast\n[data]\npath = daily_close.csv\n[tt]\nS=2\nR=2\n",
                                  TTMR_TEST_DATA);
    CHECK(fs::path(csv.csv_path) == fs::path(TTMR_TEST_DATA) / "daily_close.csv");
    CHECK(csv.window.delta == 1);
    CHECK(csv.window.horizon == 1);
}

TEST_CASE("coefficient counts") {
    const auto cfg = parse_config("[experiment]\nkind = recover-mlp\n[tt]\nS=3\nR=2\n[mlp]\nhidden=200\n");
    CHECK(cfg.models[0].coefficients(10) == 108);
    CHECK(cfg.models[1].coefficients(10) == 2401);
    CHECK(default_full_trials(ExperimentKind::recover_mlp) == 100);
}

TEST_CASE("seeds") {
    const auto a = trial_seeds(1, 0), b = trial_seeds(1, 1), c = trial_seeds(2, 0);
    CHECK(a.split != b.split);
    CHECK(a.split != c.split);
    CHECK(a.split != a.init);
    CHECK(trial_seeds(1, 0).init == a.init);
}

TEST_CASE("aggregate") {
    const auto s = aggregate({0.25, 0.25, 0.25});
    CHECK(s.mean == 0.25);
    CHECK(s.sd == 0.0);
    const auto t = aggregate({1.0, 2.0, std::nan(""), 3.0});
    CHECK(t.mean == 2.0);
    CHECK(t.sd == 1.0);
    CHECK(aggregate({4.0}).sd == 0.0);
}

TEST_CASE("single trial equals a direct fit") {
    auto cfg = parse_config(small_mg);
    cfg.trials = 1;
    cfg.models.resize(1);
    cfg.out_dir = scratch("single").string();
    const auto res = run_experiment(cfg);
    REQUIRE(res.records.size() == 1);

    const Dataset d = build_dataset(cfg);
    const auto seeds = trial_seeds(cfg.seed, 0);
    const Split sp = split(std::size_t(d.y.size()), seeds.split);
    const Dataset tr = take_rows(d, sp.train), va = take_rows(d, sp.val), te = take_rows(d, sp.test);
    const Scaler sc = scaler_fit(tr.x);
    TrainConfig tc = cfg.models[0].tt;
    tc.seed = seeds.init;
    const auto f = fit(sc.apply(tr.x), tr.y, sc.apply(va.x), va.y, tc);
    const auto m = evaluate(te.y, predict(f.tt, tc.map, sc, te.x));
    CHECK(res.records[0].metrics[test_split].mse == m.mse);
    CHECK(res.records[0].metrics[test_split].score == m.score);
    CHECK(res.summaries[0].metric[test_split][1].mean == m.score);
    CHECK(res.summaries[0].metric[test_split][1].sd == 0.0);
}

TEST_CASE("outputs and reproducibility") {
    auto cfg = parse_config(small_mg);
    cfg.out_dir = scratch("run1").string();
    const auto a = compare_experiment(cfg);
    cfg.out_dir = scratch("run2").string();
    cfg.threads = 1;
    compare_experiment(cfg);
    const fs::path p1 = fs::temp_directory_path() / "ttmr_exp_run1", p2 = fs::temp_directory_path() / "ttmr_exp_run2";
    for (const char* f : {"summary.csv", "trials.csv", "compare.csv", "manifest.json", "convergence/a.csv",
                          "traces/a_trial000.csv", "traces/b_trial002.csv", "models/a_trial000.tt"})
        CHECK_MESSAGE(fs::exists(p1 / f), std::string(f));
    CHECK(slurp(p1 / "summary.csv") == slurp(p2 / "summary.csv"));
    CHECK(slurp(p1 / "trials.csv") == slurp(p2 / "trials.csv"));
    CHECK(slurp(p1 / "compare.csv") == slurp(p2 / "compare.csv"));
    const std::string summary = slurp(p1 / "summary.csv");
    CHECK(summary.find("\na,") != std::string::npos);
    CHECK(summary.find(",24,3,0") != std::string::npos);
    CHECK(summary.find(",25,3,0") != std::string::npos);
    CHECK(summary.find("a,\"TT(S=2,R=2)\",24,") != std::string::npos);
    // every row has the header's column count once quoted fields are skipped
    std::istringstream rows(summary);
    std::string line;
    std::size_t header_cols = 0;
    while (std::getline(rows, line)) {
        std::size_t cols = 1;
        bool quoted = false;
        for (char ch : line) {
            if (ch == '"') quoted = !quoted;
            if (ch == ',' && !quoted) ++cols;
        }
        if (!header_cols) header_cols = cols;
        CHECK(cols == header_cols);
    }
    CHECK(a.records.size() == 6);
    // saved model reproduces the recorded fit
    const TTTensor back = load_tt((p1 / "models/a_trial000.tt").string());
    CHECK(back.ranks() == a.records[0].tt->ranks());
}

TEST_CASE("budget pairing") {
    auto cfg = parse_config("[experiment]\nkind = mackey-glass\n[tt]\nS=2\nR=2\n[mlp]\nhidden=4\n");
    CHECK(budget_warnings(cfg, 4).empty());
    cfg.models[1].hidden = 5;
    CHECK(budget_warnings(cfg, 4).size() == 1);
}

TEST_CASE("too many aborted trials fail the run") {
    auto cfg = parse_config(small_mg);
    cfg.models.erase(cfg.models.begin());
    cfg.models[0].mlp.learning_rate = 1e8;
    cfg.out_dir = scratch("abort").string();
    CHECK_THROWS_AS(run_experiment(cfg), std::runtime_error);
    CHECK(fs::exists(fs::path(cfg.out_dir) / "trials.csv"));
}

TEST_CASE("git blob hash") {
    // values from `git hash-object --stdin`
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}
