#include "dstp/attention.hpp"

namespace dstp {

void register_spatial(ParameterStore& store, const std::string& prefix, std::size_t T,
                      std::size_t driver_len, std::size_t in_rows, std::size_t hidden,
                      std::mt19937_64& rng) {
    store.add(prefix + ".v", init_uniform({T}, T, rng));
    store.add(prefix + ".W", init_uniform({T, 2 * hidden}, 2 * hidden, rng));
    store.add(prefix + ".U", init_uniform({T, driver_len}, driver_len, rng));
    store.add(prefix + ".b", Array::zeros({T}));
    register_lstm(store, prefix + ".lstm", in_rows, hidden, rng);
}

SpatialAttnIds bind_spatial(const BoundParams& bound, const std::string& prefix) {
    SpatialAttnIds p;
    p.v = bound[prefix + ".v"];
    p.W = bound[prefix + ".W"];
    p.U = bound[prefix + ".U"];
    p.b = bound[prefix + ".b"];
    p.lstm = bind_lstm(bound, prefix + ".lstm");
    return p;
}

void register_temporal(ParameterStore& store, const std::string& prefix, std::size_t p,
                       std::size_t q, std::mt19937_64& rng) {
    store.add(prefix + ".v", init_uniform({p}, p, rng));
    store.add(prefix + ".W", init_uniform({p, 2 * p}, 2 * p, rng));
    store.add(prefix + ".U", init_uniform({p, q}, q, rng));
    store.add(prefix + ".b", Array::zeros({p}));
}

TemporalAttnIds bind_temporal(const BoundParams& bound, const std::string& prefix) {
    TemporalAttnIds p;
    p.v = bound[prefix + ".v"];
    p.W = bound[prefix + ".W"];
    p.U = bound[prefix + ".U"];
    p.b = bound[prefix + ".b"];
    return p;
}

SpatialStepOut spatial_attn_step(Tape& t, NodeId column, const std::vector<NodeId>& row_proj,
                                 CellStateIds state, const SpatialAttnIds& p) {
    NodeId hs = t.concat(state.h, state.s);
    NodeId wpb = t.add(t.matvec(p.W, hs), p.b);
    std::vector<NodeId> scores;
    scores.reserve(row_proj.size());
    for (NodeId proj : row_proj)
        scores.push_back(t.dot(p.v, t.tanh(t.add(wpb, proj))));
    SpatialStepOut out;
    out.weights = t.softmax(t.stack(scores));
    out.weighted = t.hadamard(out.weights, column);
    out.state = lstm_step(t, out.weighted, state, p.lstm);
    return out;
}

namespace {

void check_step_index(std::size_t t, std::size_t T) {
    if (t < 1 || t > T)
        throw ContractError("attention step index " + std::to_string(t) +
                            " out of range [1, " + std::to_string(T) + "]");
}

}  // namespace

SpatialStepOut phase1_step(Tape& tape, const Array& X, std::size_t t, CellStateIds state,
                           const SpatialAttnIds& p) {
    check_step_index(t, X.cols());
    std::vector<NodeId> proj;
    proj.reserve(X.rows());
    for (std::size_t k = 0; k < X.rows(); ++k)
        proj.push_back(tape.matvec(p.U, tape.leaf(X.row(k))));
    NodeId column = tape.leaf(X.col(t - 1));
    return spatial_attn_step(tape, column, proj, state, p);
}

SpatialStepOut phase1_step_II(Tape& tape, const Array& X, const Array& Y, std::size_t t,
                              CellStateIds state, const SpatialAttnIds& p) {
    check_step_index(t, X.cols());
    if (Y.size() != X.cols())
        throw DimensionError("phase1_step_II: target history " + Y.shape_str() +
                             " does not match window " + X.shape_str());
    std::vector<NodeId> proj;
    proj.reserve(X.rows());
    for (std::size_t k = 0; k < X.rows(); ++k) {
        Array driver = X.row(k);
        driver.data.insert(driver.data.end(), Y.data.begin(), Y.data.end());
        driver.shape = {2 * X.cols()};
        proj.push_back(tape.matvec(p.U, tape.leaf(std::move(driver))));
    }
    NodeId column = tape.leaf(X.col(t - 1));
    return spatial_attn_step(tape, column, proj, state, p);
}

SpatialStepOut phase2_step(Tape& tape, const std::vector<NodeId>& z_rows, std::size_t t,
                           CellStateIds state, const SpatialAttnIds& p) {
    if (z_rows.empty()) throw ContractError("phase2_step: no input rows");
    std::size_t T = tape.val(z_rows[0]).size();
    check_step_index(t, T);
    std::vector<NodeId> proj;
    std::vector<NodeId> column_vals;
    proj.reserve(z_rows.size());
    column_vals.reserve(z_rows.size());
    for (NodeId row : z_rows) {
        proj.push_back(tape.matvec(p.U, row));
        column_vals.push_back(tape.pick(row, t - 1));
    }
    NodeId column = tape.stack(column_vals);
    return spatial_attn_step(tape, column, proj, state, p);
}

TemporalOut temporal_attn_step(Tape& t, const std::vector<NodeId>& enc_h,
                               const std::vector<NodeId>& enc_proj, CellStateIds dec_state,
                               const TemporalAttnIds& p) {
    NodeId ds = t.concat(dec_state.h, dec_state.s);
    NodeId wdb = t.add(t.matvec(p.W, ds), p.b);
    std::vector<NodeId> scores;
    scores.reserve(enc_h.size());
    for (NodeId proj : enc_proj)
        scores.push_back(t.dot(p.v, t.tanh(t.add(wdb, proj))));
    TemporalOut out;
    out.weights = t.softmax(t.stack(scores));
    out.context = t.weighted_sum(enc_h, out.weights);
    return out;
}

TemporalOut temporal_step(Tape& tape, const std::vector<NodeId>& enc_h, CellStateIds dec_state,
                          const TemporalAttnIds& p) {
    std::vector<NodeId> proj;
    proj.reserve(enc_h.size());
    for (NodeId h : enc_h) proj.push_back(tape.matvec(p.U, h));
    return temporal_attn_step(tape, enc_h, proj, dec_state, p);
}

}  // namespace dstp
