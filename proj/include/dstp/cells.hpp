#pragma once

#include <string>

#include "dstp/params.hpp"
#include "dstp/tape.hpp"

namespace dstp {

/// Tape node ids of one LSTM cell's parameters (gates i, f, o, g).
struct LstmParamIds {
    NodeId Wi, Ui, bi;
    NodeId Wf, Uf, bf;
    NodeId Wo, Uo, bo;
    NodeId Wg, Ug, bg;
};

/// Tape node ids of one GRU cell's parameters (gates z, r, candidate).
struct GruParamIds {
    NodeId Wz, Uz, bz;
    NodeId Wr, Ur, br;
    NodeId Wh, Uh, bh;
};

struct CellStateIds {
    NodeId h;
    NodeId s;  // unused for GRU
};

/// Registers W* [hidden x in], U* [hidden x hidden], b* [hidden] per gate.
/// The forget-gate bias starts at 1.0, the other biases at 0.
void register_lstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                   std::size_t hidden, std::mt19937_64& rng);

void register_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
                  std::size_t hidden, std::mt19937_64& rng);

LstmParamIds bind_lstm(const BoundParams& bound, const std::string& prefix);
GruParamIds bind_gru(const BoundParams& bound, const std::string& prefix);

/// Zero hidden (and cell) state of the given size, as tape leaves.
CellStateIds zero_state(Tape& tape, std::size_t hidden);

/// Standard LSTM update: i,f,o = sigmoid, g = tanh, s' = f*s + i*g, h' = o*tanh(s').
CellStateIds lstm_step(Tape& tape, NodeId x, CellStateIds state, const LstmParamIds& p);

/// Standard GRU update with update gate z and reset gate r:
/// candidate = tanh(W x + U (r*h) + b), h' = z*h + (1-z)*candidate.
NodeId gru_step(Tape& tape, NodeId x, NodeId h, const GruParamIds& p);

}  // namespace dstp
