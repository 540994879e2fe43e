#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dstp/array.hpp"

namespace dstp {

using NodeId = std::int32_t;

/**
 * Define-by-run reverse-mode differentiation tape.
 *
 * Every operation appends a node holding the forward value, a zero-initialized
 * gradient of identical shape, and a closure that propagates the node's
 * gradient to its inputs. Nodes are appended in execution order, so walking
 * the tape backwards visits each node after all of its consumers.
 */
class Tape {
public:
    struct Node {
        Array value;
        Array grad;
        std::function<void(Tape&)> back;
    };

    NodeId put(Array value, std::function<void(Tape&)> back = {});

    /// Leaf with no inputs (data constants and parameters alike).
    NodeId leaf(Array value) { return put(std::move(value)); }

    // --- primitives -------------------------------------------------------
    NodeId matmul(NodeId a, NodeId b);
    NodeId matvec(NodeId w, NodeId x);
    NodeId dot(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId hadamard(NodeId a, NodeId b);
    NodeId scale(NodeId a, double c);
    /// Scalar node times arbitrary node.
    NodeId smul(NodeId s, NodeId a);
    NodeId tanh(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId softmax(NodeId a);
    NodeId concat(NodeId a, NodeId b, int axis = 0);
    NodeId sum(NodeId a);
    /// Element i of a rank-1 node, as a scalar node.
    NodeId pick(NodeId a, std::size_t i);
    /// Scalars stacked into a rank-1 node.
    NodeId stack(const std::vector<NodeId>& scalars);
    /// Sum_j w[j] * vs[j], all vs of identical shape, w rank-1 of matching length.
    NodeId weighted_sum(const std::vector<NodeId>& vs, NodeId w);

    /// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse.
    void backward(NodeId loss);

    const Array& val(NodeId id) const { return nodes_[id].value; }
    const Array& grad(NodeId id) const { return nodes_[id].grad; }
    Array& grad(NodeId id) { return nodes_[id].grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<Node> nodes_;
};

}  // namespace dstp
