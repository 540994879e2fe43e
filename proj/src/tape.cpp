#include "dstp/tape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace dstp {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using CMapM = Eigen::Map<const EMat>;
using MapV = Eigen::Map<Eigen::VectorXd>;
using CMapV = Eigen::Map<const Eigen::VectorXd>;

CMapM cmat(const Array& a) { return CMapM(a.data.data(), a.rows(), a.cols()); }
MapM mmat(Array& a) { return MapM(a.data.data(), a.rows(), a.cols()); }
CMapV cvec(const Array& a) { return CMapV(a.data.data(), a.size()); }
MapV mvec(Array& a) { return MapV(a.data.data(), a.size()); }

}  // namespace

NodeId Tape::put(Array value, std::function<void(Tape&)> back) {
    Node n;
    n.grad = Array::zeros(value.shape);
    n.value = std::move(value);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows())
        throw DimensionError("matmul: incompatible shapes " + av.shape_str() + " vs " +
                             bv.shape_str());
    Array out = Array::zeros({av.rows(), bv.cols()});
    mmat(out) = cmat(av) * cmat(bv);
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, b, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        mmat(t.nodes_[a].grad).noalias() += cmat(g) * cmat(t.nodes_[b].value).transpose();
        mmat(t.nodes_[b].grad).noalias() += cmat(t.nodes_[a].value).transpose() * cmat(g);
    };
    return id;
}

NodeId Tape::matvec(NodeId w, NodeId x) {
    const Array& wv = nodes_[w].value;
    const Array& xv = nodes_[x].value;
    if (wv.rank() != 2 || xv.rank() != 1 || wv.cols() != xv.size())
        throw DimensionError("matvec: incompatible shapes " + wv.shape_str() + " vs " +
                             xv.shape_str());
    Array out = Array::zeros({wv.rows()});
    mvec(out) = cmat(wv) * cvec(xv);
    NodeId id = put(std::move(out));
    nodes_[id].back = [w, x, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        mmat(t.nodes_[w].grad).noalias() += cvec(g) * cvec(t.nodes_[x].value).transpose();
        mvec(t.nodes_[x].grad).noalias() += cmat(t.nodes_[w].value).transpose() * cvec(g);
    };
    return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    if (av.rank() != 1 || bv.rank() != 1 || av.size() != bv.size())
        throw DimensionError("dot: incompatible shapes " + av.shape_str() + " vs " +
                             bv.shape_str());
    NodeId id = put(Array::scalar(cvec(av).dot(cvec(bv))));
    nodes_[id].back = [a, b, id](Tape& t) {
        double g = t.nodes_[id].grad.data[0];
        mvec(t.nodes_[a].grad).noalias() += g * cvec(t.nodes_[b].value);
        mvec(t.nodes_[b].grad).noalias() += g * cvec(t.nodes_[a].value);
    };
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    require_same_shape(av, bv, "add");
    Array out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, b, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        mvec(t.nodes_[a].grad) += cvec(g);
        mvec(t.nodes_[b].grad) += cvec(g);
    };
    return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    require_same_shape(av, bv, "sub");
    Array out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= bv.data[i];
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, b, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        mvec(t.nodes_[a].grad) += cvec(g);
        mvec(t.nodes_[b].grad) -= cvec(g);
    };
    return id;
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    require_same_shape(av, bv, "hadamard");
    Array out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, b, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        mvec(t.nodes_[a].grad).array() += cvec(g).array() * cvec(t.nodes_[b].value).array();
        mvec(t.nodes_[b].grad).array() += cvec(g).array() * cvec(t.nodes_[a].value).array();
    };
    return id;
}

NodeId Tape::scale(NodeId a, double c) {
    Array out = nodes_[a].value;
    for (double& v : out.data) v *= c;
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, c, id](Tape& t) {
        mvec(t.nodes_[a].grad) += c * cvec(t.nodes_[id].grad);
    };
    return id;
}

NodeId Tape::smul(NodeId s, NodeId a) {
    const Array& sv = nodes_[s].value;
    if (!sv.is_scalar())
        throw DimensionError("smul: first operand must be scalar, got " + sv.shape_str());
    double c = sv.data[0];
    Array out = nodes_[a].value;
    for (double& v : out.data) v *= c;
    NodeId id = put(std::move(out));
    nodes_[id].back = [s, a, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        t.nodes_[s].grad.data[0] += cvec(g).dot(cvec(t.nodes_[a].value));
        mvec(t.nodes_[a].grad) += t.nodes_[s].value.data[0] * cvec(g);
    };
    return id;
}

NodeId Tape::tanh(NodeId a) {
    Array out = nodes_[a].value;
    for (double& v : out.data) v = std::tanh(v);
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, id](Tape& t) {
        const Array& y = t.nodes_[id].value;
        const Array& g = t.nodes_[id].grad;
        Array& ga = t.nodes_[a].grad;
        for (std::size_t i = 0; i < y.size(); ++i)
            ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
    };
    return id;
}

NodeId Tape::sigmoid(NodeId a) {
    Array out = nodes_[a].value;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, id](Tape& t) {
        const Array& y = t.nodes_[id].value;
        const Array& g = t.nodes_[id].grad;
        Array& ga = t.nodes_[a].grad;
        for (std::size_t i = 0; i < y.size(); ++i)
            ga.data[i] += g.data[i] * y.data[i] * (1.0 - y.data[i]);
    };
    return id;
}

NodeId Tape::softmax(NodeId a) {
    const Array& av = nodes_[a].value;
    if (av.rank() != 1)
        throw DimensionError("softmax: expected rank-1 input, got " + av.shape_str());
    Array out = av;
    double mx = *std::max_element(out.data.begin(), out.data.end());
    double total = 0.0;
    for (double& v : out.data) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : out.data) v /= total;
    NodeId id = put(std::move(out));
    nodes_[id].back = [a, id](Tape& t) {
        const Array& y = t.nodes_[id].value;
        const Array& g = t.nodes_[id].grad;
        double gy = cvec(g).dot(cvec(y));
        Array& ga = t.nodes_[a].grad;
        for (std::size_t i = 0; i < y.size(); ++i)
            ga.data[i] += y.data[i] * (g.data[i] - gy);
    };
    return id;
}

NodeId Tape::concat(NodeId a, NodeId b, int axis) {
    const Array& av = nodes_[a].value;
    const Array& bv = nodes_[b].value;
    if (av.rank() == 1 && bv.rank() == 1) {
        if (axis != 0) throw DimensionError("concat: rank-1 arrays only support axis 0");
        std::vector<double> out(av.data);
        out.insert(out.end(), bv.data.begin(), bv.data.end());
        std::size_t na = av.size();
        NodeId id = put(Array::vec(std::move(out)));
        nodes_[id].back = [a, b, na, id](Tape& t) {
            const Array& g = t.nodes_[id].grad;
            Array& ga = t.nodes_[a].grad;
            Array& gb = t.nodes_[b].grad;
            for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += g.data[i];
            for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += g.data[na + i];
        };
        return id;
    }
    if (av.rank() == 2 && bv.rank() == 2 && axis == 0) {
        if (av.cols() != bv.cols())
            throw DimensionError("concat: column mismatch " + av.shape_str() + " vs " +
                                 bv.shape_str());
        std::vector<double> out(av.data);
        out.insert(out.end(), bv.data.begin(), bv.data.end());
        std::size_t na = av.size();
        NodeId id = put(Array({av.rows() + bv.rows(), av.cols()}, std::move(out)));
        nodes_[id].back = [a, b, na, id](Tape& t) {
            const Array& g = t.nodes_[id].grad;
            Array& ga = t.nodes_[a].grad;
            Array& gb = t.nodes_[b].grad;
            for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += g.data[i];
            for (std::size_t i = 0; i < gb.size(); ++i) gb.data[i] += g.data[na + i];
        };
        return id;
    }
    throw DimensionError("concat: unsupported shapes " + av.shape_str() + " vs " + bv.shape_str() +
                         " on axis " + std::to_string(axis));
}

NodeId Tape::sum(NodeId a) {
    const Array& av = nodes_[a].value;
    double total = 0.0;
    for (double v : av.data) total += v;
    NodeId id = put(Array::scalar(total));
    nodes_[id].back = [a, id](Tape& t) {
        double g = t.nodes_[id].grad.data[0];
        Array& ga = t.nodes_[a].grad;
        for (double& v : ga.data) v += g;
    };
    return id;
}

NodeId Tape::pick(NodeId a, std::size_t i) {
    const Array& av = nodes_[a].value;
    if (av.rank() != 1 || i >= av.size())
        throw ContractError("pick: index " + std::to_string(i) + " out of range for " +
                            av.shape_str());
    NodeId id = put(Array::scalar(av.data[i]));
    nodes_[id].back = [a, i, id](Tape& t) {
        t.nodes_[a].grad.data[i] += t.nodes_[id].grad.data[0];
    };
    return id;
}

NodeId Tape::stack(const std::vector<NodeId>& scalars) {
    std::vector<double> out(scalars.size());
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        const Array& v = nodes_[scalars[i]].value;
        if (!v.is_scalar())
            throw DimensionError("stack: operand " + std::to_string(i) + " is not scalar: " +
                                 v.shape_str());
        out[i] = v.data[0];
    }
    NodeId id = put(Array::vec(std::move(out)));
    nodes_[id].back = [ids = scalars, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        for (std::size_t i = 0; i < ids.size(); ++i)
            t.nodes_[ids[i]].grad.data[0] += g.data[i];
    };
    return id;
}

NodeId Tape::weighted_sum(const std::vector<NodeId>& vs, NodeId w) {
    const Array& wv = nodes_[w].value;
    if (wv.rank() != 1 || wv.size() != vs.size())
        throw DimensionError("weighted_sum: weight shape " + wv.shape_str() + " vs " +
                             std::to_string(vs.size()) + " operands");
    if (vs.empty()) throw ContractError("weighted_sum: empty operand list");
    Array out = Array::zeros(nodes_[vs[0]].value.shape);
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const Array& vj = nodes_[vs[j]].value;
        require_same_shape(out, vj, "weighted_sum");
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += wv.data[j] * vj.data[i];
    }
    NodeId id = put(std::move(out));
    nodes_[id].back = [ids = vs, w, id](Tape& t) {
        const Array& g = t.nodes_[id].grad;
        const Array& wv2 = t.nodes_[w].value;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            const Array& vj = t.nodes_[ids[j]].value;
            Array& gv = t.nodes_[ids[j]].grad;
            double acc = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                acc += g.data[i] * vj.data[i];
                gv.data[i] += wv2.data[j] * g.data[i];
            }
            t.nodes_[w].grad.data[j] += acc;
        }
    };
    return id;
}

void Tape::backward(NodeId loss) {
    if (!nodes_[loss].value.is_scalar())
        throw ContractError("backward: loss must be scalar, got " +
                            nodes_[loss].value.shape_str());
    nodes_[loss].grad.data[0] = 1.0;
    for (NodeId id = loss; id >= 0; --id) {
        if (nodes_[id].back) nodes_[id].back(*this);
    }
}

}  // namespace dstp
