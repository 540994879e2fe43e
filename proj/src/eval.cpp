#include "dstp/eval.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dstp/metrics.hpp"

namespace dstp {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ForecastReport evaluate(const Checkpoint& checkpoint, const std::vector<WindowSample>& windows,
                        const EvaluateOptions& opts) {
    if (windows.empty()) throw ContractError("evaluate: no windows");
    Model model = checkpoint.to_model();
    const ModelConfig& c = model.config();

    double target_mean = 0.0, target_sd = 1.0;
    if (opts.raw_units) {
        if (checkpoint.stats.stddev.empty())
            throw ConfigError("evaluate: checkpoint carries no standardization stats");
        target_mean = checkpoint.stats.mean[checkpoint.stats.target_index];
        target_sd = checkpoint.stats.stddev[checkpoint.stats.target_index];
    }

    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> preds, truths;
    preds.reserve(windows.size() * c.horizon);
    truths.reserve(windows.size() * c.horizon);
    std::ofstream dump;
    if (!opts.prediction_csv.empty()) {
        dump.open(opts.prediction_csv);
        if (!dump) throw DataError("cannot write predictions: " + opts.prediction_csv);
        dump << "origin,horizon_step,prediction,truth\n";
    }
    for (const auto& w : windows) {
        ForwardOutput out = model.forward(w.X, Array::vec(w.y_hist));
        for (std::size_t j = 0; j < out.prediction.size(); ++j) {
            double p = out.prediction[j], y = w.future[j];
            if (opts.raw_units) {
                p = p * target_sd + target_mean;
                y = y * target_sd + target_mean;
            }
            preds.push_back(p);
            truths.push_back(y);
            if (dump.is_open())
                dump << w.origin << ',' << (j + 1) << ',' << fmt17(p) << ',' << fmt17(y) << '\n';
        }
    }
    auto t1 = std::chrono::steady_clock::now();

    ForecastReport r;
    r.arch = arch_name(c.arch);
    r.T = c.T;
    r.horizon = c.horizon;
    r.sample_count = windows.size();
    r.rmse = rmse(preds, truths);
    r.mae = mae(preds, truths);
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    for (std::size_t j = 0; j < c.horizon; ++j) {
        std::vector<double> pj, yj;
        for (std::size_t i = j; i < preds.size(); i += c.horizon) {
            pj.push_back(preds[i]);
            yj.push_back(truths[i]);
        }
        r.per_horizon_rmse.push_back(rmse(pj, yj));
    }
    return r;
}

void export_attention(const Checkpoint& checkpoint, const std::vector<WindowSample>& windows,
                      const std::string& out_path) {
    Model model = checkpoint.to_model();
    if (!arch_has_attention(model.config().arch))
        throw UnsupportedError("architecture " + arch_name(model.config().arch) +
                               " has no attention stages");
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write attention trace: " + out_path);
    out << "window,phase,step,index,weight\n";
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        ForwardOutput fo = model.forward(windows[wi].X, Array::vec(windows[wi].y_hist), true);
        for (const auto& trace : fo.traces)
            for (std::size_t step = 0; step < trace.steps.size(); ++step)
                for (std::size_t k = 0; k < trace.steps[step].size(); ++k)
                    out << wi << ',' << trace.phase << ',' << (step + 1) << ',' << (k + 1) << ','
                        << fmt17(trace.steps[step][k]) << '\n';
    }
}

std::vector<GridRow> run_grid(const SplitResult& split, const std::string& dataset_name,
                              const ExperimentGrid& grid, const ModelConfig& base,
                              const TrainConfig& tc, const std::string& out_dir) {
    if (grid.architectures.empty() || grid.horizons.empty() || grid.window_sizes.empty())
        throw ConfigError("run_grid: empty grid axis");
    std::filesystem::create_directories(out_dir);

    std::vector<GridRow> rows;
    for (Arch arch : grid.architectures) {
        for (std::size_t tau : grid.horizons) {
            for (std::size_t T : grid.window_sizes) {
                GridRow row;
                row.dataset = dataset_name;
                row.arch = arch_name(arch);
                row.T = T;
                row.horizon = tau;
                try {
                    ModelConfig mc = base;
                    mc.arch = arch;
                    mc.T = T;
                    mc.horizon = tau;
                    mc.n = split.train.exogenous_count();
                    auto train_windows = make_windows(split.train, T, tau);
                    auto test_windows = make_windows(split.test, T, tau);

                    auto t0 = std::chrono::steady_clock::now();
                    TrainResult tr = train(mc, train_windows, tc, &split.stats);
                    auto t1 = std::chrono::steady_clock::now();

                    std::string stem = out_dir + "/" + dataset_name + "_" + row.arch + "_T" +
                                       std::to_string(T) + "_h" + std::to_string(tau);
                    tr.checkpoint.save(stem + ".ckpt");
                    std::ofstream hist(stem + "_loss.csv");
                    hist << "epoch,train_mse,val_mse\n";
                    for (std::size_t e = 0; e < tr.history.size(); ++e)
                        hist << (e + 1) << ',' << fmt17(tr.history[e][0]) << ','
                             << fmt17(tr.history[e][1]) << '\n';

                    EvaluateOptions opts;
                    opts.prediction_csv = stem + "_pred.csv";
                    row.report = evaluate(tr.checkpoint, test_windows, opts);
                    row.report.dataset = dataset_name;
                    row.report.checkpoint_path = stem + ".ckpt";
                    row.report.seconds += std::chrono::duration<double>(t1 - t0).count();
                    row.status = "ok";
                } catch (const Error& e) {
                    row.status = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    }
    write_report_csv(rows, out_dir + "/report.csv");
    return rows;
}

void write_report_csv(const std::vector<GridRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << "dataset,arch,T,horizon,status,rmse,mae,samples,seconds,checkpoint\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        for (char& ch : status)
            if (ch == ',' || ch == '\n') ch = ';';
        out << r.dataset << ',' << r.arch << ',' << r.T << ',' << r.horizon << ',' << status
            << ',' << fmt17(r.report.rmse) << ',' << fmt17(r.report.mae) << ','
            << r.report.sample_count << ',' << fmt17(r.report.seconds) << ','
            << r.report.checkpoint_path << '\n';
    }
}

std::vector<GridRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open report: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<GridRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tok;
        GridRow r;
        std::getline(is, r.dataset, ',');
        std::getline(is, r.arch, ',');
        std::getline(is, tok, ','); r.T = std::stoul(tok);
        std::getline(is, tok, ','); r.horizon = std::stoul(tok);
        std::getline(is, r.status, ',');
        std::getline(is, tok, ','); r.report.rmse = std::stod(tok);
        std::getline(is, tok, ','); r.report.mae = std::stod(tok);
        std::getline(is, tok, ','); r.report.sample_count = std::stoul(tok);
        std::getline(is, tok, ','); r.report.seconds = std::stod(tok);
        std::getline(is, r.report.checkpoint_path, ',');
        r.report.dataset = r.dataset;
        r.report.arch = r.arch;
        r.report.T = r.T;
        r.report.horizon = r.horizon;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace dstp
