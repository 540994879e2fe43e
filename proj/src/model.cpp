#include "dstp/model.hpp"

#include <array>
#include <utility>

namespace dstp {

namespace {

const std::array<std::pair<const char*, Arch>, 9> kArchNames = {{
    {"lstm", Arch::Lstm},
    {"gru", Arch::Gru},
    {"enc-dec", Arch::EncDec},
    {"input-attn", Arch::InputAttn},
    {"temp-attn", Arch::TempAttn},
    {"darnn", Arch::Darnn},
    {"dstp", Arch::Dstp},
    {"dstp2", Arch::Dstp2},
    {"deepattn", Arch::DeepAttn},
}};

}  // namespace

Arch arch_from_string(const std::string& name) {
    for (const auto& [s, a] : kArchNames)
        if (name == s) return a;
    throw ConfigError("unknown architecture: " + name);
}

std::string arch_name(Arch a) {
    for (const auto& [s, v] : kArchNames)
        if (v == a) return s;
    throw ConfigError("unknown architecture enum value");
}

bool arch_has_attention(Arch a) {
    switch (a) {
        case Arch::Lstm:
        case Arch::Gru:
        case Arch::EncDec:
            return false;
        default:
            return true;
    }
}

void ModelConfig::validate() const {
    if (n < 1 || T < 1 || horizon < 1 || m < 1 || q < 1 || p < 1)
        throw ConfigError("ModelConfig: all dimensions must be >= 1");
}

Model::Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    register_params();
}

namespace {

// ---- registration helpers ------------------------------------------------

void register_decoder(ParameterStore& s, std::size_t p, std::size_t ctx, std::size_t tau,
                      std::mt19937_64& rng) {
    s.add("dec.wtilde", init_uniform({ctx + 1}, ctx + 1, rng));
    s.add("dec.btilde", Array::zeros({1}));
    register_lstm(s, "dec.lstm", 1, p, rng);
    s.add("dec.Wy", init_uniform({p, p + ctx}, p + ctx, rng));
    s.add("dec.by", Array::zeros({p}));
    s.add("dec.vy", init_uniform({tau, p}, p, rng));
    s.add("dec.bpy", Array::zeros({tau}));
}

void register_linear_head(ParameterStore& s, std::size_t hidden, std::size_t tau,
                          std::mt19937_64& rng) {
    s.add("head.V", init_uniform({tau, hidden}, hidden, rng));
    s.add("head.b", Array::zeros({tau}));
}

struct DecoderIds {
    NodeId wtilde, btilde;
    LstmParamIds lstm;
    NodeId Wy, by, vy, bpy;
};

DecoderIds bind_decoder(const BoundParams& b) {
    DecoderIds d;
    d.wtilde = b["dec.wtilde"];
    d.btilde = b["dec.btilde"];
    d.lstm = bind_lstm(b, "dec.lstm");
    d.Wy = b["dec.Wy"];
    d.by = b["dec.by"];
    d.vy = b["dec.vy"];
    d.bpy = b["dec.bpy"];
    return d;
}

// ---- forward helpers -----------------------------------------------------

struct PhaseResult {
    std::vector<NodeId> weighted;  // per step, the weighted input column
    std::vector<NodeId> weights;   // per step, the softmax weights
    std::vector<NodeId> hiddens;   // per step, the encoder hidden state
};

void record_trace(Tape& t, std::vector<AttentionTrace>* traces, const std::string& phase,
                  const std::vector<NodeId>& weight_nodes) {
    if (!traces) return;
    AttentionTrace tr;
    tr.phase = phase;
    for (NodeId w : weight_nodes) tr.steps.push_back(t.val(w).data);
    traces->push_back(std::move(tr));
}

// First-phase spatial attention over the constant exogenous window. When
// target_driver is non-null the per-attribute driver is [x^k; Y] (phase 1-II).
PhaseResult run_phase1(Tape& t, const Array& X, const Array* target_driver,
                       const SpatialAttnIds& p, std::size_t hidden) {
    std::size_t T = X.cols();
    std::vector<NodeId> proj;
    proj.reserve(X.rows());
    for (std::size_t k = 0; k < X.rows(); ++k) {
        Array driver = X.row(k);
        if (target_driver) {
            driver.data.insert(driver.data.end(), target_driver->data.begin(),
                               target_driver->data.end());
            driver.shape = {2 * T};
        }
        proj.push_back(t.matvec(p.U, t.leaf(std::move(driver))));
    }
    PhaseResult r;
    CellStateIds state = zero_state(t, hidden);
    for (std::size_t step = 0; step < T; ++step) {
        SpatialStepOut out = spatial_attn_step(t, t.leaf(X.col(step)), proj, state, p);
        r.weighted.push_back(out.weighted);
        r.weights.push_back(out.weights);
        r.hiddens.push_back(out.state.h);
        state = out.state;
    }
    return r;
}

// Reassembles per-step weighted columns (each [rows]) into per-attribute rows
// (each [T]).
std::vector<NodeId> columns_to_rows(Tape& t, const std::vector<NodeId>& columns,
                                    std::size_t rows) {
    std::vector<NodeId> out;
    out.reserve(rows);
    for (std::size_t k = 0; k < rows; ++k) {
        std::vector<NodeId> elems;
        elems.reserve(columns.size());
        for (NodeId c : columns) elems.push_back(t.pick(c, k));
        out.push_back(t.stack(elems));
    }
    return out;
}

// Spatial attention over on-tape rows (phase 2 and the stacked third unit).
PhaseResult run_spatial_over_rows(Tape& t, const std::vector<NodeId>& rows,
                                  const SpatialAttnIds& p, std::size_t hidden) {
    std::size_t T = t.val(rows[0]).size();
    std::vector<NodeId> proj;
    proj.reserve(rows.size());
    for (NodeId row : rows) proj.push_back(t.matvec(p.U, row));
    PhaseResult r;
    CellStateIds state = zero_state(t, hidden);
    for (std::size_t step = 0; step < T; ++step) {
        std::vector<NodeId> elems;
        elems.reserve(rows.size());
        for (NodeId row : rows) elems.push_back(t.pick(row, step));
        SpatialStepOut out = spatial_attn_step(t, t.stack(elems), proj, state, p);
        r.weighted.push_back(out.weighted);
        r.weights.push_back(out.weights);
        r.hiddens.push_back(out.state.h);
        state = out.state;
    }
    return r;
}

// Plain LSTM encoder over constant input columns.
std::vector<NodeId> run_plain_encoder(Tape& t, const Array& X, const LstmParamIds& cell,
                                      std::size_t hidden) {
    std::vector<NodeId> hs;
    CellStateIds state = zero_state(t, hidden);
    for (std::size_t step = 0; step < X.cols(); ++step) {
        state = lstm_step(t, t.leaf(X.col(step)), state, cell);
        hs.push_back(state.h);
    }
    return hs;
}

// Shared decoder: y~_t = w~.[y_t; c_t] + b~ (context from temporal attention
// or a fixed vector), d_t = f_d(d_{t-1}, y~_{t-1}), prediction from [d_T; c_T].
NodeId run_decoder(Tape& t, const DecoderIds& dec, std::size_t p_hidden, const Array& Y,
                   const std::vector<NodeId>* enc_h, const TemporalAttnIds* temporal,
                   NodeId fixed_context, std::vector<AttentionTrace>* traces) {
    std::size_t T = Y.size();
    std::vector<NodeId> enc_proj;
    if (temporal) {
        enc_proj.reserve(enc_h->size());
        for (NodeId h : *enc_h) enc_proj.push_back(t.matvec(temporal->U, h));
    }
    CellStateIds state = zero_state(t, p_hidden);
    NodeId ytilde_prev = t.leaf(Array::scalar(0.0));
    NodeId context = fixed_context;
    std::vector<NodeId> gamma_nodes;
    for (std::size_t step = 0; step < T; ++step) {
        if (temporal) {
            TemporalOut out = temporal_attn_step(t, *enc_h, enc_proj, state, *temporal);
            context = out.context;
            gamma_nodes.push_back(out.weights);
        }
        state = lstm_step(t, ytilde_prev, state, dec.lstm);
        NodeId yc = t.concat(t.leaf(Array::scalar(Y.data[step])), context);
        ytilde_prev = t.add(t.dot(dec.wtilde, yc), dec.btilde);
    }
    if (temporal) record_trace(t, traces, "temporal", gamma_nodes);
    NodeId dc = t.concat(state.h, context);
    return t.add(t.matvec(dec.vy, t.add(t.matvec(dec.Wy, dc), dec.by)), dec.bpy);
}

Array input_with_target(const Array& X, const Array& Y, std::size_t step) {
    Array col = X.col(step);
    col.data.push_back(Y.data[step]);
    col.shape = {col.data.size()};
    return col;
}

}  // namespace

void Model::register_params() {
    std::mt19937_64 rng(config_.seed);
    const auto& c = config_;
    switch (c.arch) {
        case Arch::Lstm:
            register_lstm(params_, "cell", c.n + 1, c.m, rng);
            register_linear_head(params_, c.m, c.horizon, rng);
            break;
        case Arch::Gru:
            register_gru(params_, "cell", c.n + 1, c.m, rng);
            register_linear_head(params_, c.m, c.horizon, rng);
            break;
        case Arch::EncDec:
            register_lstm(params_, "enc.lstm", c.n, c.q, rng);
            register_decoder(params_, c.p, c.q, c.horizon, rng);
            break;
        case Arch::InputAttn:
            register_spatial(params_, "phase1", c.T, c.T, c.n, c.m, rng);
            register_linear_head(params_, c.m, c.horizon, rng);
            break;
        case Arch::TempAttn:
            register_lstm(params_, "enc.lstm", c.n, c.q, rng);
            register_temporal(params_, "temporal", c.p, c.q, rng);
            register_decoder(params_, c.p, c.q, c.horizon, rng);
            break;
        case Arch::Darnn:
            register_spatial(params_, "phase1", c.T, c.T, c.n, c.m, rng);
            register_temporal(params_, "temporal", c.p, c.m, rng);
            register_decoder(params_, c.p, c.m, c.horizon, rng);
            break;
        case Arch::Dstp:
            register_spatial(params_, "phase1", c.T, c.T, c.n, c.m, rng);
            register_spatial(params_, "phase2", c.T, c.T, c.n + 1, c.q, rng);
            register_temporal(params_, "temporal", c.p, c.q, rng);
            register_decoder(params_, c.p, c.q, c.horizon, rng);
            break;
        case Arch::Dstp2:
            register_spatial(params_, "phase1", c.T, c.T, c.n, c.m, rng);
            register_spatial(params_, "phase1b", c.T, 2 * c.T, c.n, c.m, rng);
            register_spatial(params_, "phase2", c.T, c.T, 2 * c.n + 1, c.q, rng);
            register_temporal(params_, "temporal", c.p, c.q, rng);
            register_decoder(params_, c.p, c.q, c.horizon, rng);
            break;
        case Arch::DeepAttn:
            register_spatial(params_, "phase1", c.T, c.T, c.n, c.m, rng);
            register_spatial(params_, "phase2", c.T, c.T, c.n + 1, c.q, rng);
            register_spatial(params_, "phase3", c.T, c.T, c.n + 1, c.q, rng);
            register_temporal(params_, "temporal", c.p, c.q, rng);
            register_decoder(params_, c.p, c.q, c.horizon, rng);
            break;
    }
}

NodeId Model::predict_on_tape(Tape& t, const BoundParams& b, const Array& X, const Array& Y,
                              std::vector<AttentionTrace>* traces) const {
    const auto& c = config_;
    if (X.rank() != 2 || X.rows() != c.n || X.cols() != c.T)
        throw DimensionError("forward: X " + X.shape_str() + " does not match config [" +
                             std::to_string(c.n) + "x" + std::to_string(c.T) + "]");
    if (Y.rank() != 1 || Y.size() != c.T)
        throw DimensionError("forward: Y " + Y.shape_str() + " does not match window length " +
                             std::to_string(c.T));

    switch (c.arch) {
        case Arch::Lstm: {
            LstmParamIds cell = bind_lstm(b, "cell");
            CellStateIds state = zero_state(t, c.m);
            for (std::size_t step = 0; step < c.T; ++step)
                state = lstm_step(t, t.leaf(input_with_target(X, Y, step)), state, cell);
            return t.add(t.matvec(b["head.V"], state.h), b["head.b"]);
        }
        case Arch::Gru: {
            GruParamIds cell = bind_gru(b, "cell");
            NodeId h = t.leaf(Array::zeros({c.m}));
            for (std::size_t step = 0; step < c.T; ++step)
                h = gru_step(t, t.leaf(input_with_target(X, Y, step)), h, cell);
            return t.add(t.matvec(b["head.V"], h), b["head.b"]);
        }
        case Arch::EncDec: {
            LstmParamIds enc = bind_lstm(b, "enc.lstm");
            std::vector<NodeId> hs = run_plain_encoder(t, X, enc, c.q);
            DecoderIds dec = bind_decoder(b);
            return run_decoder(t, dec, c.p, Y, nullptr, nullptr, hs.back(), traces);
        }
        case Arch::InputAttn: {
            SpatialAttnIds p1 = bind_spatial(b, "phase1");
            PhaseResult r = run_phase1(t, X, nullptr, p1, c.m);
            record_trace(t, traces, "1", r.weights);
            return t.add(t.matvec(b["head.V"], r.hiddens.back()), b["head.b"]);
        }
        case Arch::TempAttn: {
            LstmParamIds enc = bind_lstm(b, "enc.lstm");
            std::vector<NodeId> hs = run_plain_encoder(t, X, enc, c.q);
            TemporalAttnIds temporal = bind_temporal(b, "temporal");
            DecoderIds dec = bind_decoder(b);
            return run_decoder(t, dec, c.p, Y, &hs, &temporal, -1, traces);
        }
        case Arch::Darnn: {
            SpatialAttnIds p1 = bind_spatial(b, "phase1");
            PhaseResult r = run_phase1(t, X, nullptr, p1, c.m);
            record_trace(t, traces, "1", r.weights);
            TemporalAttnIds temporal = bind_temporal(b, "temporal");
            DecoderIds dec = bind_decoder(b);
            return run_decoder(t, dec, c.p, Y, &r.hiddens, &temporal, -1, traces);
        }
        case Arch::Dstp:
        case Arch::DeepAttn: {
            SpatialAttnIds p1 = bind_spatial(b, "phase1");
            PhaseResult r1 = run_phase1(t, X, nullptr, p1, c.m);
            record_trace(t, traces, "1", r1.weights);

            std::vector<NodeId> z_rows = columns_to_rows(t, r1.weighted, c.n);
            z_rows.push_back(t.leaf(Y));
            SpatialAttnIds p2 = bind_spatial(b, "phase2");
            PhaseResult r2 = run_spatial_over_rows(t, z_rows, p2, c.q);
            record_trace(t, traces, "2", r2.weights);

            std::vector<NodeId>* enc_h = &r2.hiddens;
            PhaseResult r3;
            if (c.arch == Arch::DeepAttn) {
                std::vector<NodeId> w_rows = columns_to_rows(t, r2.weighted, c.n + 1);
                SpatialAttnIds p3 = bind_spatial(b, "phase3");
                r3 = run_spatial_over_rows(t, w_rows, p3, c.q);
                record_trace(t, traces, "3", r3.weights);
                enc_h = &r3.hiddens;
            }
            TemporalAttnIds temporal = bind_temporal(b, "temporal");
            DecoderIds dec = bind_decoder(b);
            return run_decoder(t, dec, c.p, Y, enc_h, &temporal, -1, traces);
        }
        case Arch::Dstp2: {
            SpatialAttnIds p1 = bind_spatial(b, "phase1");
            PhaseResult r1 = run_phase1(t, X, nullptr, p1, c.m);
            record_trace(t, traces, "1", r1.weights);
            SpatialAttnIds p1b = bind_spatial(b, "phase1b");
            PhaseResult r1b = run_phase1(t, X, &Y, p1b, c.m);
            record_trace(t, traces, "1-II", r1b.weights);

            std::vector<NodeId> z_rows = columns_to_rows(t, r1.weighted, c.n);
            std::vector<NodeId> z_rows_b = columns_to_rows(t, r1b.weighted, c.n);
            z_rows.insert(z_rows.end(), z_rows_b.begin(), z_rows_b.end());
            z_rows.push_back(t.leaf(Y));
            SpatialAttnIds p2 = bind_spatial(b, "phase2");
            PhaseResult r2 = run_spatial_over_rows(t, z_rows, p2, c.q);
            record_trace(t, traces, "2", r2.weights);

            TemporalAttnIds temporal = bind_temporal(b, "temporal");
            DecoderIds dec = bind_decoder(b);
            return run_decoder(t, dec, c.p, Y, &r2.hiddens, &temporal, -1, traces);
        }
    }
    throw ConfigError("unknown architecture");
}

ForwardOutput Model::forward(const Array& X, const Array& Y, bool trace) {
    Tape tape;
    BoundParams bound(tape, params_);
    ForwardOutput out;
    NodeId pred =
        predict_on_tape(tape, bound, X, Y, trace ? &out.traces : nullptr);
    out.prediction = tape.val(pred).data;
    return out;
}

}  // namespace dstp
