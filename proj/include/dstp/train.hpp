#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dstp/dataset.hpp"
#include "dstp/model.hpp"

namespace dstp {

struct TrainConfig {
    std::size_t batch_size = 128;
    double learning_rate = 0.001;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;      // non-improving epochs tolerated after the best
    double val_fraction = 0.1;      // chronological tail of the train windows
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 2019;
    double clip_norm = 5.0;         // global L2 gradient clip

    void validate() const;
};

/// Mean over samples of the squared L2 norm of the residual vector.
double mse_loss(const std::vector<std::vector<double>>& preds,
                const std::vector<std::vector<double>>& truths);

/**
 * Adam with bias correction. Gradients are clipped to a global L2 norm of
 * clip_norm before the update; moments live in the ParameterStore entries.
 */
class Adam {
public:
    explicit Adam(const TrainConfig& config) : config_(config) {}

    void step(ParameterStore& store);
    std::size_t steps() const { return step_; }

private:
    TrainConfig config_;
    std::size_t step_ = 0;
};

struct Checkpoint {
    ModelConfig config;
    std::vector<std::pair<std::string, Array>> parameters;  // registration order
    StandardizationStats stats;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    std::uint64_t seed = 0;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    static Checkpoint from_model(const Model& model);
    /// Reconstructs the model and overwrites its parameters with the stored arrays.
    Model to_model() const;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<std::array<double, 2>> history;  // per epoch: {train_mse, val_mse}
    std::size_t steps = 0;                       // optimizer steps taken
};

/**
 * Deterministic minibatch training: seeded per-epoch shuffling, Adam updates,
 * validation on the chronological tail, best-validation early stopping.
 */
TrainResult train(const ModelConfig& model_config, const std::vector<WindowSample>& windows,
                  const TrainConfig& train_config,
                  const StandardizationStats* stats = nullptr, std::ostream* log = nullptr);

}  // namespace dstp
