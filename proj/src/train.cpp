#include "dstp/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

namespace dstp {

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    if (val_fraction < 0.0 || val_fraction >= 0.5)
        throw ConfigError("validation fraction must be in [0, 0.5)");
}

double mse_loss(const std::vector<std::vector<double>>& preds,
                const std::vector<std::vector<double>>& truths) {
    if (preds.empty() || preds.size() != truths.size())
        throw DimensionError("mse_loss: " + std::to_string(preds.size()) + " predictions vs " +
                             std::to_string(truths.size()) + " truths");
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != truths[i].size())
            throw DimensionError("mse_loss: sample " + std::to_string(i) + " length mismatch " +
                                 std::to_string(preds[i].size()) + " vs " +
                                 std::to_string(truths[i].size()));
        for (std::size_t j = 0; j < preds[i].size(); ++j) {
            double d = preds[i][j] - truths[i][j];
            total += d * d;
        }
    }
    return total / static_cast<double>(preds.size());
}

void Adam::step(ParameterStore& store) {
    double norm_sq = 0.0;
    for (const auto& e : store.entries())
        for (double g : e.grad.data) norm_sq += g * g;
    double norm = std::sqrt(norm_sq);
    double clip_scale = (norm > config_.clip_norm && norm > 0.0) ? config_.clip_norm / norm : 1.0;

    ++step_;
    double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (auto& e : store.entries()) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            double g = e.grad.data[i] * clip_scale;
            double& m = e.moment1.data[i];
            double& v = e.moment2.data[i];
            m = config_.beta1 * m + (1.0 - config_.beta1) * g;
            v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
            double mhat = m / bc1;
            double vhat = v / bc2;
            e.value.data[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
}

// ---- checkpoint ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'D', 'S', 'T', 'P', 'C', 'K', 'P', '1'};

nlohmann::json config_to_json(const ModelConfig& c) {
    return {{"arch", arch_name(c.arch)}, {"n", c.n},      {"T", c.T}, {"horizon", c.horizon},
            {"m", c.m},                  {"q", c.q},      {"p", c.p}, {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.arch = arch_from_string(j.at("arch").get<std::string>());
    c.n = j.at("n").get<std::size_t>();
    c.T = j.at("T").get<std::size_t>();
    c.horizon = j.at("horizon").get<std::size_t>();
    c.m = j.at("m").get<std::size_t>();
    c.q = j.at("q").get<std::size_t>();
    c.p = j.at("p").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
    nlohmann::json header;
    header["config"] = config_to_json(config);
    header["params"] = nlohmann::json::array();
    for (const auto& [name, arr] : parameters)
        header["params"].push_back({{"name", name}, {"shape", arr.shape}});
    header["stats"] = {{"mean", stats.mean}, {"stddev", stats.stddev},
                       {"target_index", stats.target_index}};
    header["meta"] = {{"best_epoch", best_epoch}, {"best_val_loss", best_val_loss},
                      {"seed", seed}};
    std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    std::uint64_t len = hs.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, arr] : parameters)
        out.write(reinterpret_cast<const char*>(arr.data.data()),
                  static_cast<std::streamsize>(arr.data.size() * sizeof(double)));
    if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a checkpoint file: " + path);
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string hs(len, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated checkpoint header: " + path);
    nlohmann::json header = nlohmann::json::parse(hs);

    Checkpoint ck;
    ck.config = config_from_json(header.at("config"));
    ck.stats.mean = header.at("stats").at("mean").get<std::vector<double>>();
    ck.stats.stddev = header.at("stats").at("stddev").get<std::vector<double>>();
    ck.stats.target_index = header.at("stats").value("target_index", std::size_t{0});
    ck.best_epoch = header.at("meta").at("best_epoch").get<std::size_t>();
    ck.best_val_loss = header.at("meta").at("best_val_loss").get<double>();
    ck.seed = header.at("meta").at("seed").get<std::uint64_t>();
    for (const auto& pj : header.at("params")) {
        std::string name = pj.at("name").get<std::string>();
        auto shape = pj.at("shape").get<std::vector<std::size_t>>();
        Array arr = Array::zeros(shape);
        in.read(reinterpret_cast<char*>(arr.data.data()),
                static_cast<std::streamsize>(arr.data.size() * sizeof(double)));
        if (!in) throw DataError("truncated checkpoint payload: " + path);
        ck.parameters.emplace_back(std::move(name), std::move(arr));
    }
    return ck;
}

Checkpoint Checkpoint::from_model(const Model& model) {
    Checkpoint ck;
    ck.config = model.config();
    ck.seed = model.config().seed;
    for (const auto& e : model.params().entries())
        ck.parameters.emplace_back(e.name, e.value);
    return ck;
}

Model Checkpoint::to_model() const {
    Model model(config);
    for (const auto& [name, arr] : parameters) {
        auto& entry = model.params().at(name);
        require_same_shape(entry.value, arr, "checkpoint restore");
        entry.value = arr;
    }
    return model;
}

// ---- training loop -------------------------------------------------------

namespace {

// One forward+backward for a single window; returns the sample's sum-squared
// residual. The loss contribution is scaled by 1/batch before backward.
double sample_step(Model& model, const WindowSample& w, double inv_batch) {
    Tape tape;
    BoundParams bound(tape, model.params());
    NodeId pred = model.predict_on_tape(tape, bound, w.X, Array::vec(w.y_hist));
    NodeId res = tape.sub(pred, tape.leaf(Array::vec(w.future)));
    NodeId sq = tape.sum(tape.hadamard(res, res));
    NodeId loss = tape.scale(sq, inv_batch);
    tape.backward(loss);
    bound.accumulate();
    return tape.val(sq).data[0];
}

double eval_mse(Model& model, const std::vector<WindowSample>& windows) {
    if (windows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const auto& w : windows) {
        ForwardOutput out = model.forward(w.X, Array::vec(w.y_hist));
        for (std::size_t j = 0; j < out.prediction.size(); ++j) {
            double d = out.prediction[j] - w.future[j];
            total += d * d;
        }
    }
    return total / static_cast<double>(windows.size());
}

}  // namespace

TrainResult train(const ModelConfig& model_config, const std::vector<WindowSample>& windows,
                  const TrainConfig& tc, const StandardizationStats* stats, std::ostream* log) {
    tc.validate();
    std::size_t n_val = static_cast<std::size_t>(tc.val_fraction *
                                                 static_cast<double>(windows.size()));
    std::size_t n_train = windows.size() - n_val;
    if (n_train < tc.batch_size)
        throw ContractError("train: " + std::to_string(n_train) +
                            " training windows cannot fill a batch of " +
                            std::to_string(tc.batch_size));

    std::vector<WindowSample> train_set(windows.begin(), windows.begin() + n_train);
    std::vector<WindowSample> val_set(windows.begin() + n_train, windows.end());

    Model model(model_config);
    Adam adam(tc);

    TrainResult result;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    std::vector<std::pair<std::string, Array>> best_params;

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(tc.seed * 0x9E3779B97F4A7C15ULL + epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_total = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n_train; start += tc.batch_size, ++batch_index) {
            std::size_t count = std::min(tc.batch_size, n_train - start);
            double inv = 1.0 / static_cast<double>(count);
            model.params().zero_grads();
            double batch_total = 0.0;
            for (std::size_t i = 0; i < count; ++i)
                batch_total += sample_step(model, train_set[order[start + i]], inv);
            if (!std::isfinite(batch_total))
                throw DivergenceError("training diverged (non-finite loss) at epoch " +
                                          std::to_string(epoch) + ", batch " +
                                          std::to_string(batch_index),
                                      static_cast<int>(epoch), static_cast<int>(batch_index));
            adam.step(model.params());
            epoch_total += batch_total;
        }
        double train_mse = epoch_total / static_cast<double>(n_train);
        double val_mse = val_set.empty() ? train_mse : eval_mse(model, val_set);
        result.history.push_back({train_mse, val_mse});
        if (log)
            (*log) << "epoch " << epoch << " train_mse " << train_mse << " val_mse " << val_mse
                   << "\n";

        if (val_mse < best_val) {
            best_val = val_mse;
            best_epoch = epoch;
            best_params.clear();
            for (const auto& e : model.params().entries())
                best_params.emplace_back(e.name, e.value);
        }
        if (epoch - best_epoch >= tc.patience) break;
    }

    result.steps = adam.steps();
    result.checkpoint.config = model_config;
    result.checkpoint.parameters = std::move(best_params);
    if (stats) result.checkpoint.stats = *stats;
    result.checkpoint.best_epoch = best_epoch;
    result.checkpoint.best_val_loss = best_val;
    result.checkpoint.seed = tc.seed;
    return result;
}

}  // namespace dstp
