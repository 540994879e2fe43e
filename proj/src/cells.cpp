#include "dstp/cells.hpp"

namespace dstp {

namespace {

void register_gate(ParameterStore& store, const std::string& prefix, const char* gate,
                   std::size_t in, std::size_t hidden, double bias_init, std::mt19937_64& rng) {
    store.add(prefix + ".W" + gate, init_uniform({hidden, in}, in, rng));
    store.add(prefix + ".U" + gate, init_uniform({hidden, hidden}, hidden, rng));
    Array b = Array::zeros({hidden});
    for (double& v : b.data) v = bias_init;
    store.add(prefix + ".b" + gate, std::move(b));
}

NodeId gate_preact(Tape& t, NodeId W, NodeId U, NodeId b, NodeId x, NodeId h) {
    return t.add(t.add(t.matvec(W, x), t.matvec(U, h)), b);
}

}  // namespace

void register_lstm(ParameterStore& store, const std::string& prefix, std::size_t in,
                   std::size_t hidden, std::mt19937_64& rng) {
    register_gate(store, prefix, "i", in, hidden, 0.0, rng);
    register_gate(store, prefix, "f", in, hidden, 1.0, rng);
    register_gate(store, prefix, "o", in, hidden, 0.0, rng);
    register_gate(store, prefix, "g", in, hidden, 0.0, rng);
}

void register_gru(ParameterStore& store, const std::string& prefix, std::size_t in,
                  std::size_t hidden, std::mt19937_64& rng) {
    register_gate(store, prefix, "z", in, hidden, 0.0, rng);
    register_gate(store, prefix, "r", in, hidden, 0.0, rng);
    register_gate(store, prefix, "h", in, hidden, 0.0, rng);
}

LstmParamIds bind_lstm(const BoundParams& bound, const std::string& prefix) {
    LstmParamIds p;
    p.Wi = bound[prefix + ".Wi"]; p.Ui = bound[prefix + ".Ui"]; p.bi = bound[prefix + ".bi"];
    p.Wf = bound[prefix + ".Wf"]; p.Uf = bound[prefix + ".Uf"]; p.bf = bound[prefix + ".bf"];
    p.Wo = bound[prefix + ".Wo"]; p.Uo = bound[prefix + ".Uo"]; p.bo = bound[prefix + ".bo"];
    p.Wg = bound[prefix + ".Wg"]; p.Ug = bound[prefix + ".Ug"]; p.bg = bound[prefix + ".bg"];
    return p;
}

GruParamIds bind_gru(const BoundParams& bound, const std::string& prefix) {
    GruParamIds p;
    p.Wz = bound[prefix + ".Wz"]; p.Uz = bound[prefix + ".Uz"]; p.bz = bound[prefix + ".bz"];
    p.Wr = bound[prefix + ".Wr"]; p.Ur = bound[prefix + ".Ur"]; p.br = bound[prefix + ".br"];
    p.Wh = bound[prefix + ".Wh"]; p.Uh = bound[prefix + ".Uh"]; p.bh = bound[prefix + ".bh"];
    return p;
}

CellStateIds zero_state(Tape& tape, std::size_t hidden) {
    CellStateIds st;
    st.h = tape.leaf(Array::zeros({hidden}));
    st.s = tape.leaf(Array::zeros({hidden}));
    return st;
}

CellStateIds lstm_step(Tape& t, NodeId x, CellStateIds state, const LstmParamIds& p) {
    NodeId i = t.sigmoid(gate_preact(t, p.Wi, p.Ui, p.bi, x, state.h));
    NodeId f = t.sigmoid(gate_preact(t, p.Wf, p.Uf, p.bf, x, state.h));
    NodeId o = t.sigmoid(gate_preact(t, p.Wo, p.Uo, p.bo, x, state.h));
    NodeId g = t.tanh(gate_preact(t, p.Wg, p.Ug, p.bg, x, state.h));
    NodeId s_new = t.add(t.hadamard(f, state.s), t.hadamard(i, g));
    NodeId h_new = t.hadamard(o, t.tanh(s_new));
    return {h_new, s_new};
}

NodeId gru_step(Tape& t, NodeId x, NodeId h, const GruParamIds& p) {
    NodeId z = t.sigmoid(gate_preact(t, p.Wz, p.Uz, p.bz, x, h));
    NodeId r = t.sigmoid(gate_preact(t, p.Wr, p.Ur, p.br, x, h));
    NodeId cand = t.tanh(t.add(t.add(t.matvec(p.Wh, x), t.matvec(p.Uh, t.hadamard(r, h))), p.bh));
    // h' = z*h + (1-z)*cand
    Array ones_val = Array::zeros(t.val(z).shape);
    for (double& v : ones_val.data) v = 1.0;
    NodeId ones = t.leaf(std::move(ones_val));
    return t.add(t.hadamard(z, h), t.hadamard(t.sub(ones, z), cand));
}

}  // namespace dstp
