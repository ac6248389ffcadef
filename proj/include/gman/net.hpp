#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gman/graph.hpp"
#include "gman/rng.hpp"
#include "gman/tensor.hpp"

namespace gman {

enum class Mode { Train, Eval };

enum class OutputActivation { None, Tanh };

// Layer-wise description of an MLP. widths[0] is the input dimension,
// widths.back() the output dimension. Hidden layers use ReLU; the output
// layer applies `output` (the discriminator keeps a raw logit here and is
// squashed by the objective layer). dropout/batchnorm entries are per hidden
// layer; empty vectors mean "none anywhere".
struct NetworkSpec {
    std::vector<std::size_t> widths;
    std::vector<double> dropout;
    std::vector<bool> batchnorm;
    OutputActivation output = OutputActivation::None;
    double output_init_gain = 1.0; // multiplies the last layer's init bound

    std::size_t input_dim() const { return widths.front(); }
    std::size_t output_dim() const { return widths.back(); }
    std::size_t layer_count() const { return widths.size() - 1; }
    std::size_t hidden_count() const { return widths.size() >= 2 ? widths.size() - 2 : 0; }
    double dropout_at(std::size_t h) const { return h < dropout.size() ? dropout[h] : 0.0; }
    bool batchnorm_at(std::size_t h) const { return h < batchnorm.size() && batchnorm[h]; }

    void validate() const; // throws std::invalid_argument on bad spec

    bool operator==(const NetworkSpec&) const = default;
};

struct NamedTensor {
    std::string name;
    Tensor value;
    bool trainable = true;
};

// Ordered set of named tensors owned by exactly one network. Batch-norm
// running statistics ride along as non-trainable entries.
struct Parameters {
    std::vector<NamedTensor> items;

    Tensor& get(std::string_view name);
    const Tensor& get(std::string_view name) const;
    Tensor* find(std::string_view name);
    std::size_t trainable_count() const;
    void add(std::string name, Tensor value, bool trainable = true);
};

// Glorot-uniform weights, zero biases, unit gamma / zero beta, running
// mean 0 / var 1. Draw order is fixed (layer by layer, W entries row-major)
// so initialization is a pure function of the stream seed.
Parameters init_mlp_parameters(const NetworkSpec& spec, RngStream& init);

// Binds one network's parameters into a graph (one leaf per trainable item)
// so repeated applications share leaves and gradients accumulate. Train mode
// samples dropout masks from `dropout_rng` and updates running batch-norm
// stats; eval mode never touches the stream.
class BoundMlp {
public:
    BoundMlp(Graph& g, const NetworkSpec& spec, Parameters& params, Mode mode);

    NodeId apply(NodeId x, RngStream* dropout_rng = nullptr);

    // Leaf ids parallel to the trainable items of `params`.
    const std::vector<NodeId>& trainable_leaves() const { return leaves_; }

    // Leaf for one trainable tensor by name.
    NodeId leaf(std::string_view name) const;

    // Gradients for the trainable items, in item order. backward() must have
    // run on the graph.
    std::vector<Tensor> trainable_grads() const;

private:
    Graph* g_;
    const NetworkSpec* spec_;
    Parameters* params_;
    Mode mode_;
    std::vector<NodeId> leaves_;          // parallel to trainable items
    std::vector<std::int32_t> item_leaf_; // item index -> leaf slot (-1 for non-trainable)
};

// Single-shot forward pass: builds the bindings, applies once, returns the
// output node. Shape mismatches are rejected with a dimension diagnostic.
NodeId mlp_forward(Graph& g, NodeId input, const NetworkSpec& spec, Parameters& params, Mode mode,
                   RngStream* dropout_rng = nullptr);

// Inverted dropout as a standalone operation: train mode masks and rescales,
// eval mode is the identity and never reads the stream.
NodeId dropout_apply(Graph& g, NodeId x, double rate, RngStream& rng, Mode mode);

// Batch normalization as a standalone operation over [B,F] inputs.
NodeId batchnorm_forward(Graph& g, NodeId x, NodeId gamma, NodeId beta, Tensor& running_mean,
                         Tensor& running_var, Mode mode, double eps = 1e-5,
                         double momentum = 0.9);

} // namespace gman
