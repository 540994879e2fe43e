#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "dstp/eval.hpp"
#include "dstp/metrics.hpp"
#include "test_util.hpp"

using namespace dstp;
using dstp::testing::close;

namespace {

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

struct Fixture {
    std::vector<WindowSample> windows;
    Checkpoint checkpoint;

    Fixture(const std::string& arch = "dstp", std::size_t n = 3, std::size_t T = 5,
            std::size_t tau = 2) {
        SyntheticResult s = synthesize(n, 40, 1, 3);
        windows = make_windows(s.table, T, tau);
        ModelConfig mc;
        mc.arch = arch_from_string(arch);
        mc.n = n;
        mc.T = T;
        mc.horizon = tau;
        mc.m = mc.q = mc.p = 4;
        Model model(mc);
        checkpoint = Checkpoint::from_model(model);
    }
};

}  // namespace

TEST_CASE("rmse and mae on known residuals") {
    CHECK(rmse({1.0, -1.0}, {0.0, 0.0}) == 1.0);
    CHECK(mae({1.0, -1.0}, {0.0, 0.0}) == 1.0);
    CHECK(close(rmse({0.0, 2.0}, {0.0, 0.0}), std::sqrt(2.0), 1e-15));
    CHECK(mae({0.0, 2.0}, {0.0, 0.0}) == 1.0);
    CHECK(rmse({3.0}, {3.0}) == 0.0);
    CHECK_THROWS_AS(rmse({}, {}), ContractError);
    CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), ContractError);
}

TEST_CASE("metrics match a brute-force accumulation on large random inputs") {
    std::mt19937_64 rng(2019);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (std::size_t size : {std::size_t{1}, std::size_t{997}, std::size_t{100000}}) {
        std::vector<double> p(size), y(size);
        for (std::size_t i = 0; i < size; ++i) {
            p[i] = dist(rng);
            y[i] = dist(rng);
        }
        double sq = 0.0, ab = 0.0;
        for (std::size_t i = 0; i < size; ++i) {
            sq += (p[i] - y[i]) * (p[i] - y[i]);
            ab += std::abs(p[i] - y[i]);
        }
        CHECK(close(rmse(p, y), std::sqrt(sq / static_cast<double>(size)), 1e-12));
        CHECK(close(mae(p, y), ab / static_cast<double>(size), 1e-12));
    }
}

TEST_CASE("fmt17 round-trips doubles exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        double v = dist(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
        CHECK(std::strtod(fmt17(v).c_str(), nullptr) == v);
    }
    CHECK(std::strtod(fmt17(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("evaluate is deterministic and consistent with its own dump") {
    Fixture f;
    EvaluateOptions opts;
    opts.prediction_csv = temp_path("dstp_eval_pred.csv");
    ForecastReport a = evaluate(f.checkpoint, f.windows, opts);
    ForecastReport b = evaluate(f.checkpoint, f.windows);
    CHECK(a.rmse == b.rmse);
    CHECK(a.mae == b.mae);
    CHECK(a.sample_count == f.windows.size());
    CHECK(a.arch == "dstp");

    // replay the dumped file and recompute both metrics
    std::ifstream in(opts.prediction_csv);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "origin,horizon_step,prediction,truth");
    std::vector<double> preds, truths;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string tok;
        std::getline(is, tok, ',');
        std::getline(is, tok, ',');
        std::getline(is, tok, ',');
        preds.push_back(std::strtod(tok.c_str(), nullptr));
        std::getline(is, tok, ',');
        truths.push_back(std::strtod(tok.c_str(), nullptr));
    }
    std::remove(opts.prediction_csv.c_str());
    CHECK(preds.size() == f.windows.size() * 2);
    CHECK(close(rmse(preds, truths), a.rmse, 1e-12));
    CHECK(close(mae(preds, truths), a.mae, 1e-12));

    // pooled rmse^2 is the mean of the per-horizon rmse^2 (equal counts)
    REQUIRE(a.per_horizon_rmse.size() == 2);
    double pooled = 0.0;
    for (double r : a.per_horizon_rmse) pooled += r * r;
    CHECK(close(std::sqrt(pooled / 2.0), a.rmse, 1e-12));

    CHECK_THROWS_AS(evaluate(f.checkpoint, {}), ContractError);
}

TEST_CASE("raw-unit metrics rescale by the target standard deviation") {
    Fixture f;
    f.checkpoint.stats.mean = {0.5, 1.5, 2.5, 3.5};
    f.checkpoint.stats.stddev = {1.0, 2.0, 3.0, 4.0};
    f.checkpoint.stats.target_index = 3;
    ForecastReport std_units = evaluate(f.checkpoint, f.windows);
    EvaluateOptions opts;
    opts.raw_units = true;
    ForecastReport raw = evaluate(f.checkpoint, f.windows, opts);
    CHECK(close(raw.rmse, std_units.rmse * 4.0, 1e-12));
    CHECK(close(raw.mae, std_units.mae * 4.0, 1e-12));

    Fixture bare;
    CHECK_THROWS_AS(evaluate(bare.checkpoint, bare.windows, opts), ConfigError);
}

TEST_CASE("attention export layout and normalization") {
    Fixture f("dstp", 3, 5, 2);
    std::string path = temp_path("dstp_eval_attn.csv");
    std::vector<WindowSample> two(f.windows.begin(), f.windows.begin() + 2);
    export_attention(f.checkpoint, two, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "window,phase,step,index,weight");
    std::map<std::string, double> sums;
    std::map<std::string, std::size_t> counts;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string window, phase, step, index, weight;
        std::getline(is, window, ',');
        std::getline(is, phase, ',');
        std::getline(is, step, ',');
        std::getline(is, index, ',');
        std::getline(is, weight, ',');
        std::string key = window + "|" + phase + "|" + step;
        sums[key] += std::strtod(weight.c_str(), nullptr);
        counts[key] += 1;
        ++rows;
    }
    std::remove(path.c_str());

    // per window: phase 1 is 5 steps x 3 attributes, phase 2 is 5 x 4 rows,
    // temporal is 5 decoder steps x 5 encoder steps
    CHECK(rows == 2 * (5 * 3 + 5 * 4 + 5 * 5));
    for (const auto& [key, total] : sums) CHECK(close(total, 1.0, 1e-9));
    CHECK(counts["0|1|1"] == 3);
    CHECK(counts["0|2|1"] == 4);
    CHECK(counts["1|temporal|5"] == 5);
}

TEST_CASE("attention export refuses architectures without attention") {
    Fixture f("lstm");
    CHECK_THROWS_AS(export_attention(f.checkpoint, f.windows, temp_path("unused.csv")),
                    UnsupportedError);
}

TEST_CASE("report csv round trip") {
    std::vector<GridRow> rows(2);
    rows[0].dataset = "synthetic";
    rows[0].arch = "dstp";
    rows[0].T = 10;
    rows[0].horizon = 5;
    rows[0].status = "ok";
    rows[0].report.rmse = 1.0 / 3.0;
    rows[0].report.mae = 0.125;
    rows[0].report.sample_count = 42;
    rows[0].report.seconds = 1.5;
    rows[0].report.checkpoint_path = "out/a.ckpt";
    rows[1].dataset = "synthetic";
    rows[1].arch = "lstm";
    rows[1].T = 5;
    rows[1].horizon = 1;
    rows[1].status = "failed, with a comma";

    std::string path = temp_path("dstp_eval_report.csv");
    write_report_csv(rows, path);
    auto back = read_report_csv(path);
    std::remove(path.c_str());

    REQUIRE(back.size() == 2);
    CHECK(back[0].dataset == "synthetic");
    CHECK(back[0].arch == "dstp");
    CHECK(back[0].T == 10);
    CHECK(back[0].horizon == 5);
    CHECK(back[0].status == "ok");
    CHECK(back[0].report.rmse == 1.0 / 3.0);
    CHECK(back[0].report.mae == 0.125);
    CHECK(back[0].report.sample_count == 42);
    CHECK(back[0].report.checkpoint_path == "out/a.ckpt");
    CHECK(back[1].status == "failed; with a comma");

    CHECK_THROWS_AS(read_report_csv("/nonexistent/report.csv"), DataError);
}

TEST_CASE("grid runs every job and records failures without stopping") {
    SyntheticResult s = synthesize(2, 110, 1, 9);
    DatasetSpec spec;
    spec.train_size = 80;
    spec.test_size = 30;
    SplitResult split = split_and_standardize(s.table, spec);

    ExperimentGrid grid;
    grid.architectures = {Arch::Lstm, Arch::Darnn};
    grid.horizons = {1, 40};  // 40 cannot fit in the 30-row test split
    grid.window_sizes = {4};

    ModelConfig base;
    base.m = base.q = base.p = 4;
    TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 1;
    tc.patience = 0;

    std::string out_dir = temp_path("dstp_grid_out");
    auto rows = run_grid(split, "synthetic", grid, base, tc, out_dir);
    REQUIRE(rows.size() == 4);
    std::size_t ok = 0, failed = 0;
    for (const auto& r : rows) {
        CHECK(r.dataset == "synthetic");
        if (r.status == "ok") {
            ++ok;
            CHECK(std::filesystem::exists(r.report.checkpoint_path));
            CHECK(r.report.rmse > 0.0);
        } else {
            ++failed;
        }
    }
    CHECK(ok == 2);
    CHECK(failed == 2);

    auto report = read_report_csv(out_dir + "/report.csv");
    CHECK(report.size() == 4);

    // deterministic job order: arch-major, then horizon, then window
    CHECK(rows[0].arch == "lstm");
    CHECK(rows[0].horizon == 1);
    CHECK(rows[1].arch == "lstm");
    CHECK(rows[1].horizon == 40);
    CHECK(rows[2].arch == "darnn");

    std::filesystem::remove_all(out_dir);

    CHECK_THROWS_AS(run_grid(split, "synthetic", ExperimentGrid{}, base, tc, out_dir),
                    ConfigError);
}
