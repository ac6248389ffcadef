#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gman/rng.hpp"
#include "gman/tensor.hpp"

namespace gman {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    AddRow,
    Mul,
    Scale,
    AddConst,
    Neg,
    Recip,
    Relu,
    Tanh,
    Exp,
    Log,
    Sigmoid,
    Softplus,
    MeanAll,
    SumAll,
    Concat,
    Dropout,
    BatchNormTrain,
    BatchNormEval,
};

// Reverse-mode tape over dense tensors. Operations execute eagerly on
// insertion; backward() runs one reverse sweep in insertion order, so every
// node is visited exactly once and nodes with no path to the loss keep a
// zero gradient.
class Graph {
public:
    NodeId leaf(Tensor value);

    NodeId matmul(NodeId a, NodeId b); // [m,k] x [k,n] -> [m,n]
    NodeId add(NodeId a, NodeId b);    // same shape
    NodeId add_row(NodeId a, NodeId row); // [m,n] + [n], row broadcast
    NodeId mul(NodeId a, NodeId b);    // elementwise, same shape
    NodeId scale(NodeId a, double k);
    NodeId add_const(NodeId a, double k);
    NodeId neg(NodeId a);
    NodeId recip(NodeId a);
    NodeId relu(NodeId a);
    NodeId tanh(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId sigmoid(NodeId a);
    NodeId softplus(NodeId a);
    NodeId mean_all(NodeId a); // -> [1]
    NodeId sum_all(NodeId a);  // -> [1]
    NodeId concat(std::span<const NodeId> parts); // along axis 0

    // Inverted dropout: zeroes entries with probability `rate`, scales the
    // survivors by 1/(1-rate). rate == 0 returns the input node unchanged
    // without touching the stream. Eval-mode callers skip this entirely.
    NodeId dropout(NodeId a, double rate, RngStream& rng);

    // Train-mode batch normalization over features of a [B,F] input with
    // batch statistics (variance epsilon `eps`); updates the running stats
    // in place with the given momentum. B >= 2 required.
    NodeId batchnorm_train(NodeId x, NodeId gamma, NodeId beta, Tensor& running_mean,
                           Tensor& running_var, double eps, double momentum);

    // Eval-mode batch normalization using the running statistics.
    NodeId batchnorm_eval(NodeId x, NodeId gamma, NodeId beta, const Tensor& running_mean,
                          const Tensor& running_var, double eps);

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients for every node.
    // The loss must be scalar.
    void backward(NodeId loss);

    const Tensor& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Tensor& grad(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }

private:
    struct Aux {
        std::vector<double> vec;  // dropout: scaled mask; batchnorm: inv_std
        Tensor xhat;              // batchnorm: normalized input
    };

    struct Node {
        Op op = Op::Leaf;
        NodeId in0 = -1;
        NodeId in1 = -1;
        NodeId in2 = -1;
        double k = 0.0; // constant for Scale/AddConst
        Tensor value;
        Tensor grad;
        std::vector<NodeId> extra_in; // Concat inputs
        std::unique_ptr<Aux> aux;
    };

    NodeId push(Node n);
    Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    void check_id(NodeId id, const char* where) const;

    std::vector<Node> nodes_;
    bool has_grads_ = false;
};

} // namespace gman
