#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dstp/attention.hpp"

namespace dstp {

enum class Arch {
    Lstm,
    Gru,
    EncDec,
    InputAttn,
    TempAttn,
    Darnn,
    Dstp,
    Dstp2,
    DeepAttn,
};

Arch arch_from_string(const std::string& name);
std::string arch_name(Arch a);
bool arch_has_attention(Arch a);

struct ModelConfig {
    Arch arch = Arch::Dstp;
    std::size_t n = 1;        // exogenous series count
    std::size_t T = 10;       // window length
    std::size_t horizon = 1;  // tau
    std::size_t m = 64;       // phase-1 encoder hidden size
    std::size_t q = 64;       // phase-2 encoder hidden size
    std::size_t p = 64;       // decoder hidden size
    std::uint64_t seed = 2019;

    void validate() const;
};

struct ForwardOutput {
    std::vector<double> prediction;           // length horizon
    std::vector<AttentionTrace> traces;       // empty when tracing disabled
};

/**
 * A complete forecaster: parameter registration + architecture-dispatched
 * forward pass on a tape. Parameters are initialized deterministically from
 * the config seed at construction.
 */
class Model {
public:
    explicit Model(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    ParameterStore& params() { return params_; }
    const ParameterStore& params() const { return params_; }
    std::size_t parameter_count() const { return params_.scalar_count(); }

    /// Builds the prediction node (length horizon) for one sample.
    NodeId predict_on_tape(Tape& tape, const BoundParams& bound, const Array& X, const Array& Y,
                           std::vector<AttentionTrace>* traces = nullptr) const;

    ForwardOutput forward(const Array& X, const Array& Y, bool trace = false);

private:
    void register_params();

    ModelConfig config_;
    ParameterStore params_;
};

}  // namespace dstp
