// Command-line surface: prepare / train / evaluate / predict /
// export-attention / grid.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dstp/eval.hpp"

namespace fs = std::filesystem;
using namespace dstp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct CliOptions {
    std::string config_file;
    std::string dataset;  // dataset config file path or synthetic spec
    std::string arch = "dstp";
    std::size_t window = 10;
    std::size_t horizon = 10;
    std::size_t hidden = 64;
    std::uint64_t seed = 2019;
    std::string out_dir = "out";
    std::string checkpoint;
    std::size_t batch_size = 128;
    double learning_rate = 0.001;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    bool raw_units = false;
    std::string grid_archs = "dstp,dstp2,deepattn,darnn";
    std::string grid_horizons = "5,10,30,50,120";
    std::string grid_windows = "5,10";
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

DatasetSpec resolve_dataset(const CliOptions& opt) {
    if (opt.dataset.empty()) throw ConfigError("--dataset is required");
    return dataset_spec_from_file(opt.dataset);
}

SplitResult load_split(const CliOptions& opt) {
    DatasetSpec spec = resolve_dataset(opt);
    Table table = load(spec);
    return split_and_standardize(table, spec);
}

ModelConfig model_config(const CliOptions& opt, std::size_t n) {
    ModelConfig mc;
    mc.arch = arch_from_string(opt.arch);
    mc.n = n;
    mc.T = opt.window;
    mc.horizon = opt.horizon;
    mc.m = mc.q = mc.p = opt.hidden;
    mc.seed = opt.seed;
    return mc;
}

TrainConfig train_config(const CliOptions& opt) {
    TrainConfig tc;
    tc.batch_size = opt.batch_size;
    tc.learning_rate = opt.learning_rate;
    tc.max_epochs = opt.max_epochs;
    tc.patience = opt.patience;
    tc.seed = opt.seed;
    return tc;
}

int cmd_prepare(const CliOptions& opt) {
    SplitResult split = load_split(opt);
    fs::create_directories(opt.out_dir);
    auto dump = [&](const Table& t, const std::string& name) {
        std::ofstream out(opt.out_dir + "/" + name);
        for (std::size_t c = 0; c < t.width(); ++c) out << (c ? "," : "") << t.columns[c];
        out << "\n";
        for (std::size_t r = 0; r < t.rows(); ++r) {
            for (std::size_t c = 0; c < t.width(); ++c)
                out << (c ? "," : "") << fmt17(t.cols[c][r]);
            out << "\n";
        }
    };
    dump(split.train, "train.csv");
    dump(split.test, "test.csv");
    std::ofstream stats(opt.out_dir + "/stats.csv");
    stats << "column,mean,stddev\n";
    for (std::size_t c = 0; c < split.train.width(); ++c)
        stats << split.train.columns[c] << ',' << fmt17(split.stats.mean[c]) << ','
              << fmt17(split.stats.stddev[c]) << "\n";
    std::cout << "prepared " << split.train.rows() << " train rows, " << split.test.rows()
              << " test rows, " << split.train.exogenous_count() << " exogenous series\n";
    return kExitOk;
}

int cmd_train(const CliOptions& opt) {
    SplitResult split = load_split(opt);
    ModelConfig mc = model_config(opt, split.train.exogenous_count());
    auto windows = make_windows(split.train, mc.T, mc.horizon);
    TrainResult tr = train(mc, windows, train_config(opt), &split.stats, &std::cout);
    fs::create_directories(opt.out_dir);
    std::string stem = opt.out_dir + "/" + opt.arch + "_T" + std::to_string(mc.T) + "_h" +
                       std::to_string(mc.horizon);
    tr.checkpoint.save(stem + ".ckpt");
    std::ofstream hist(stem + "_loss.csv");
    hist << "epoch,train_mse,val_mse\n";
    for (std::size_t e = 0; e < tr.history.size(); ++e)
        hist << (e + 1) << ',' << fmt17(tr.history[e][0]) << ',' << fmt17(tr.history[e][1])
             << "\n";
    std::cout << "saved " << stem << ".ckpt (best epoch " << tr.checkpoint.best_epoch
              << ", val mse " << tr.checkpoint.best_val_loss << ")\n";
    return kExitOk;
}

int cmd_evaluate(const CliOptions& opt, bool dump_predictions) {
    if (opt.checkpoint.empty()) throw ConfigError("--checkpoint is required");
    Checkpoint ck = Checkpoint::load(opt.checkpoint);
    SplitResult split = load_split(opt);
    auto windows = make_windows(split.test, ck.config.T, ck.config.horizon);
    fs::create_directories(opt.out_dir);
    EvaluateOptions eo;
    eo.raw_units = opt.raw_units;
    if (dump_predictions) eo.prediction_csv = opt.out_dir + "/predictions.csv";
    ForecastReport r = evaluate(ck, windows, eo);
    std::cout << "arch " << r.arch << " T " << r.T << " horizon " << r.horizon << " windows "
              << r.sample_count << "\nRMSE " << fmt17(r.rmse) << "\nMAE " << fmt17(r.mae)
              << "\n";
    return kExitOk;
}

int cmd_export_attention(const CliOptions& opt) {
    if (opt.checkpoint.empty()) throw ConfigError("--checkpoint is required");
    Checkpoint ck = Checkpoint::load(opt.checkpoint);
    SplitResult split = load_split(opt);
    auto windows = make_windows(split.test, ck.config.T, ck.config.horizon);
    fs::create_directories(opt.out_dir);
    std::string path = opt.out_dir + "/attention.csv";
    export_attention(ck, windows, path);
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_grid(const CliOptions& opt) {
    DatasetSpec spec = resolve_dataset(opt);
    SplitResult split = split_and_standardize(load(spec), spec);
    ExperimentGrid grid;
    for (const auto& a : split_list(opt.grid_archs)) grid.architectures.push_back(arch_from_string(a));
    for (const auto& h : split_list(opt.grid_horizons)) grid.horizons.push_back(std::stoul(h));
    for (const auto& w : split_list(opt.grid_windows)) grid.window_sizes.push_back(std::stoul(w));
    ModelConfig base;
    base.m = base.q = base.p = opt.hidden;
    base.seed = opt.seed;
    auto rows = run_grid(split, spec.name, grid, base, train_config(opt), opt.out_dir);
    for (const auto& r : rows)
        std::cout << r.dataset << " " << r.arch << " T=" << r.T << " h=" << r.horizon << " "
                  << (r.status == "ok" ? "rmse=" + fmt17(r.report.rmse) : r.status) << "\n";
    std::cout << "report: " << opt.out_dir << "/report.csv\n";
    return kExitOk;
}

// Flags override values from --config (key=value, same keys as flag names).
void apply_config_file(CLI::App& app, CliOptions& opt) {
    if (opt.config_file.empty()) return;
    std::ifstream in(opt.config_file);
    if (!in) throw ConfigError("cannot open config file: " + opt.config_file);
    std::string line;
    auto set_if_default = [&](const std::string& flag, const std::string& value) {
        CLI::Option* o = app.get_option_no_throw("--" + flag);
        if (o && o->count() == 0) {
            try {
                o->add_result(value);
                o->run_callback();
            } catch (const CLI::Error&) {
                throw ConfigError("config: bad value for " + flag + ": " + value);
            }
        }
    };
    while (std::getline(in, line)) {
        auto pos = line.find('=');
        if (line.empty() || line[0] == '#' || pos == std::string::npos) continue;
        std::string key = line.substr(0, pos);
        std::string value = line.substr(pos + 1);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t") + 1);
        set_if_default(key, value);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DSTP-RNN multivariate time-series forecaster"};
    app.require_subcommand(1);
    CliOptions opt;

    app.add_option("--config", opt.config_file, "key=value config file (flags override)");
    app.add_option("--dataset", opt.dataset, "dataset config file");
    app.add_option("--arch", opt.arch, "architecture");
    app.add_option("--window", opt.window, "window length T");
    app.add_option("--horizon", opt.horizon, "prediction horizon");
    app.add_option("--hidden", opt.hidden, "hidden size (m = p = q)");
    app.add_option("--seed", opt.seed, "random seed");
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_option("--checkpoint", opt.checkpoint, "checkpoint path");
    app.add_option("--batch-size", opt.batch_size, "minibatch size");
    app.add_option("--lr", opt.learning_rate, "learning rate");
    app.add_option("--max-epochs", opt.max_epochs, "epoch budget");
    app.add_option("--patience", opt.patience, "early-stop patience");
    app.add_flag("--raw-units", opt.raw_units, "report metrics in raw units");
    app.add_option("--grid-archs", opt.grid_archs, "grid: architectures");
    app.add_option("--grid-horizons", opt.grid_horizons, "grid: horizons");
    app.add_option("--grid-windows", opt.grid_windows, "grid: window sizes");

    auto* prepare = app.add_subcommand("prepare", "load, split, standardize, cache");
    auto* train_cmd = app.add_subcommand("train", "train one model");
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
    auto* predict_cmd = app.add_subcommand("predict", "evaluate and dump predictions");
    auto* attn_cmd = app.add_subcommand("export-attention", "dump attention weights");
    auto* grid_cmd = app.add_subcommand("grid", "train/evaluate a whole experiment grid");

    try {
        app.parse(argc, argv);
        apply_config_file(app, opt);
        if (prepare->parsed()) return cmd_prepare(opt);
        if (train_cmd->parsed()) return cmd_train(opt);
        if (eval_cmd->parsed()) return cmd_evaluate(opt, false);
        if (predict_cmd->parsed()) return cmd_evaluate(opt, true);
        if (attn_cmd->parsed()) return cmd_export_attention(opt);
        if (grid_cmd->parsed()) return cmd_grid(opt);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
