#pragma once

#include <string>
#include <vector>

#include "dstp/cells.hpp"

namespace dstp {

/// Spatial attention parameters: score vector v [T], state map W [T x 2*hidden],
/// driver map U [T x driver_len], bias b [T], plus the driving encoder LSTM.
struct SpatialAttnIds {
    NodeId v, W, U, b;
    LstmParamIds lstm;
};

/// Temporal attention parameters: v [p], W [p x 2p], U [p x q], b [p].
struct TemporalAttnIds {
    NodeId v, W, U, b;
};

struct SpatialStepOut {
    NodeId weighted;   // attention-weighted input column
    NodeId weights;    // softmax weights over attributes
    CellStateIds state;
};

struct TemporalOut {
    NodeId context;  // convex combination of encoder hidden states
    NodeId weights;  // softmax weights over the T encoder steps
};

/// Per-sample, per-step attention weights for one phase.
struct AttentionTrace {
    std::string phase;  // "1", "1-II", "2", "3", "temporal"
    std::vector<std::vector<double>> steps;
};

void register_spatial(ParameterStore& store, const std::string& prefix, std::size_t T,
                      std::size_t driver_len, std::size_t in_rows, std::size_t hidden,
                      std::mt19937_64& rng);
SpatialAttnIds bind_spatial(const BoundParams& bound, const std::string& prefix);

void register_temporal(ParameterStore& store, const std::string& prefix, std::size_t p,
                       std::size_t q, std::mt19937_64& rng);
TemporalAttnIds bind_temporal(const BoundParams& bound, const std::string& prefix);

/// Score/normalize/weight/encode over precomputed per-attribute driver
/// projections (row_proj[k] = U * driver_k, each length T). `column` holds the
/// attribute values to be weighted at the current step.
SpatialStepOut spatial_attn_step(Tape& tape, NodeId column,
                                 const std::vector<NodeId>& row_proj, CellStateIds state,
                                 const SpatialAttnIds& p);

/// First-phase spatial attention over raw exogenous rows (driver = x^k, len T).
/// t is 1-based.
SpatialStepOut phase1_step(Tape& tape, const Array& X, std::size_t t, CellStateIds state,
                           const SpatialAttnIds& p);

/// First-phase variant whose driver is the concatenation [x^k; Y] (len 2T);
/// weights still apply to the exogenous values only.
SpatialStepOut phase1_step_II(Tape& tape, const Array& X, const Array& Y, std::size_t t,
                              CellStateIds state, const SpatialAttnIds& p);

/// Second-phase spatial attention over on-tape rows (weighted exogenous rows
/// plus the raw target row as the final row).
SpatialStepOut phase2_step(Tape& tape, const std::vector<NodeId>& z_rows, std::size_t t,
                           CellStateIds state, const SpatialAttnIds& p);

/// Temporal attention over precomputed encoder projections
/// (enc_proj[i] = U * enc_h[i]).
TemporalOut temporal_attn_step(Tape& tape, const std::vector<NodeId>& enc_h,
                               const std::vector<NodeId>& enc_proj, CellStateIds dec_state,
                               const TemporalAttnIds& p);

/// Temporal attention scoring the T encoder hidden states against the decoder state.
TemporalOut temporal_step(Tape& tape, const std::vector<NodeId>& enc_h, CellStateIds dec_state,
                          const TemporalAttnIds& p);

}  // namespace dstp
