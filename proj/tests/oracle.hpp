#pragma once

// Straight-line re-implementations of the attention/encoder/decoder math on
// plain vectors. Deliberately independent of the tape: simple loops only,
// used as the reference in oracle-equivalence tests.

#include <cmath>
#include <string>
#include <vector>

#include "dstp/model.hpp"

namespace oracle {

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0, cols = 0;
    Vec data;
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline Vec to_vec(const dstp::Array& a) { return a.data; }
inline Mat to_mat(const dstp::Array& a) { return {a.rows(), a.cols(), a.data}; }

inline Vec get_vec(const dstp::ParameterStore& s, const std::string& name) {
    return to_vec(s.at(name).value);
}
inline Mat get_mat(const dstp::ParameterStore& s, const std::string& name) {
    return to_mat(s.at(name).value);
}

inline Vec matv(const Mat& m, const Vec& x) {
    Vec out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out[r] += m.at(r, c) * x[c];
    return out;
}
inline double dotv(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
inline Vec addv(const Vec& a, const Vec& b) {
    Vec out(a);
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}
inline Vec catv(const Vec& a, const Vec& b) {
    Vec out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}
inline Vec tanhv(const Vec& a) {
    Vec out(a);
    for (double& v : out) v = std::tanh(v);
    return out;
}
inline Vec sigv(const Vec& a) {
    Vec out(a);
    for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
    return out;
}
inline Vec softmaxv(const Vec& a) {
    double mx = a[0];
    for (double v : a) mx = std::max(mx, v);
    Vec out(a);
    double total = 0.0;
    for (double& v : out) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : out) v /= total;
    return out;
}

struct LstmP {
    Mat Wi, Ui, Wf, Uf, Wo, Uo, Wg, Ug;
    Vec bi, bf, bo, bg;
};

inline LstmP get_lstm(const dstp::ParameterStore& s, const std::string& p) {
    return {get_mat(s, p + ".Wi"), get_mat(s, p + ".Ui"), get_mat(s, p + ".Wf"),
            get_mat(s, p + ".Uf"), get_mat(s, p + ".Wo"), get_mat(s, p + ".Uo"),
            get_mat(s, p + ".Wg"), get_mat(s, p + ".Ug"), get_vec(s, p + ".bi"),
            get_vec(s, p + ".bf"), get_vec(s, p + ".bo"), get_vec(s, p + ".bg")};
}

struct State {
    Vec h, s;
};

inline State lstm(const Vec& x, const State& st, const LstmP& p) {
    Vec i = sigv(addv(addv(matv(p.Wi, x), matv(p.Ui, st.h)), p.bi));
    Vec f = sigv(addv(addv(matv(p.Wf, x), matv(p.Uf, st.h)), p.bf));
    Vec o = sigv(addv(addv(matv(p.Wo, x), matv(p.Uo, st.h)), p.bo));
    Vec g = tanhv(addv(addv(matv(p.Wg, x), matv(p.Ug, st.h)), p.bg));
    State out;
    out.s.resize(st.s.size());
    out.h.resize(st.h.size());
    for (std::size_t j = 0; j < out.s.size(); ++j) {
        out.s[j] = f[j] * st.s[j] + i[j] * g[j];
        out.h[j] = o[j] * std::tanh(out.s[j]);
    }
    return out;
}

struct SpatialP {
    Vec v, b;
    Mat W, U;
    LstmP lstm;
};

inline SpatialP get_spatial(const dstp::ParameterStore& s, const std::string& p) {
    return {get_vec(s, p + ".v"), get_vec(s, p + ".b"), get_mat(s, p + ".W"),
            get_mat(s, p + ".U"), get_lstm(s, p + ".lstm")};
}

struct SpatialStep {
    Vec weighted, weights;
    State state;
};

// One score/normalize/weight/encode step: score_k = v' tanh(W[h;s] + U d_k + b).
inline SpatialStep spatial_step(const std::vector<Vec>& drivers, const Vec& column,
                                const State& st, const SpatialP& p) {
    Vec hs = catv(st.h, st.s);
    Vec scores;
    for (const Vec& d : drivers)
        scores.push_back(dotv(p.v, tanhv(addv(addv(matv(p.W, hs), matv(p.U, d)), p.b))));
    SpatialStep out;
    out.weights = softmaxv(scores);
    out.weighted.resize(column.size());
    for (std::size_t k = 0; k < column.size(); ++k)
        out.weighted[k] = out.weights[k] * column[k];
    out.state = lstm(out.weighted, st, p.lstm);
    return out;
}

struct PhaseOut {
    std::vector<Vec> weighted;  // per step
    std::vector<Vec> weights;
    std::vector<Vec> hiddens;
};

// Full spatial phase over T steps. `rows` holds the per-attribute series that
// are both weighted (column per step) and, unless `drivers` is given, used as
// the score drivers.
inline PhaseOut spatial_phase(const std::vector<Vec>& rows, const SpatialP& p,
                              std::size_t hidden, const std::vector<Vec>* drivers = nullptr) {
    std::size_t T = rows[0].size();
    const std::vector<Vec>& drv = drivers ? *drivers : rows;
    PhaseOut out;
    State st{Vec(hidden, 0.0), Vec(hidden, 0.0)};
    for (std::size_t t = 0; t < T; ++t) {
        Vec column(rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) column[k] = rows[k][t];
        SpatialStep step = spatial_step(drv, column, st, p);
        out.weighted.push_back(step.weighted);
        out.weights.push_back(step.weights);
        out.hiddens.push_back(step.state.h);
        st = step.state;
    }
    return out;
}

struct TemporalP {
    Vec v, b;
    Mat W, U;
};

inline TemporalP get_temporal(const dstp::ParameterStore& s, const std::string& p) {
    return {get_vec(s, p + ".v"), get_vec(s, p + ".b"), get_mat(s, p + ".W"),
            get_mat(s, p + ".U")};
}

struct TemporalStep {
    Vec context, weights;
};

inline TemporalStep temporal_step(const std::vector<Vec>& enc_h, const State& dec,
                                  const TemporalP& p) {
    Vec ds = catv(dec.h, dec.s);
    Vec scores;
    for (const Vec& h : enc_h)
        scores.push_back(dotv(p.v, tanhv(addv(addv(matv(p.W, ds), matv(p.U, h)), p.b))));
    TemporalStep out;
    out.weights = softmaxv(scores);
    out.context.assign(enc_h[0].size(), 0.0);
    for (std::size_t j = 0; j < enc_h.size(); ++j)
        for (std::size_t i = 0; i < out.context.size(); ++i)
            out.context[i] += out.weights[j] * enc_h[j][i];
    return out;
}

// Temporal-attention decoder + multi-step readout.
inline Vec decode(const dstp::ParameterStore& s, const std::vector<Vec>& enc_h, const Vec& y,
                  std::size_t p_hidden) {
    TemporalP tp = get_temporal(s, "temporal");
    LstmP dec_lstm = get_lstm(s, "dec.lstm");
    Vec wtilde = get_vec(s, "dec.wtilde");
    double btilde = get_vec(s, "dec.btilde")[0];
    Mat Wy = get_mat(s, "dec.Wy");
    Vec by = get_vec(s, "dec.by");
    Mat vy = get_mat(s, "dec.vy");
    Vec bpy = get_vec(s, "dec.bpy");

    State st{Vec(p_hidden, 0.0), Vec(p_hidden, 0.0)};
    double ytilde_prev = 0.0;
    Vec context;
    for (std::size_t t = 0; t < y.size(); ++t) {
        TemporalStep ts = temporal_step(enc_h, st, tp);
        context = ts.context;
        st = lstm(Vec{ytilde_prev}, st, dec_lstm);
        Vec yc = catv(Vec{y[t]}, context);
        ytilde_prev = dotv(wtilde, yc) + btilde;
    }
    Vec dc = catv(st.h, context);
    return addv(matv(vy, addv(matv(Wy, dc), by)), bpy);
}

// Whole DSTP forward pass, assembled from the pieces above.
inline Vec dstp_forward(const dstp::Model& model, const dstp::Array& X, const dstp::Array& Y) {
    const dstp::ModelConfig& c = model.config();
    const dstp::ParameterStore& s = model.params();

    std::vector<Vec> x_rows;
    for (std::size_t k = 0; k < c.n; ++k) x_rows.push_back(to_vec(X.row(k)));
    PhaseOut p1 = spatial_phase(x_rows, get_spatial(s, "phase1"), c.m);

    std::vector<Vec> z_rows(c.n, Vec(c.T, 0.0));
    for (std::size_t t = 0; t < c.T; ++t)
        for (std::size_t k = 0; k < c.n; ++k) z_rows[k][t] = p1.weighted[t][k];
    z_rows.push_back(to_vec(Y));
    PhaseOut p2 = spatial_phase(z_rows, get_spatial(s, "phase2"), c.q);

    return decode(s, p2.hiddens, to_vec(Y), c.p);
}

}  // namespace oracle
