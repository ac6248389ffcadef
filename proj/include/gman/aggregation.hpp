#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gman/graph.hpp"

namespace gman {

enum class AggregationKind { Max, Am, Gm, Hm };

enum class LambdaMode { Fixed, Learned };

struct AggregationConfig {
    AggregationKind kind = AggregationKind::Am;
    LambdaMode lambda_mode = LambdaMode::Fixed;
    double lambda = 0.0;   // fixed mode; must be >= 0
    double c = 0.001;      // learned mode regulation constant, > 0
    double lambda0 = -2.0; // learned mode initial value of the raw parameter

    void validate() const;

    bool operator==(const AggregationConfig&) const = default;
};

// Softmax weights w_i = exp(lambda*V_i) / sum_j exp(lambda*V_j), computed
// with max-subtraction. Requires every V_i < 0 and lambda >= 0.
std::vector<double> softmax_weights(std::span<const double> v, double lambda);

// Softplus reparameterization lambda = log(1 + e^Lambda), with gradient
// d lambda / d Lambda = sigmoid(Lambda).
double lambda_reparam(double raw);

// Plain-value aggregate of negative utilities: arithmetic/geometric/harmonic
// softmax-weighted means, or the hard max. The single-element case returns
// v[0] exactly for every kind (all means of one element coincide).
double aggregate_value(std::span<const double> v, AggregationKind kind, double lambda);

// Graph-node aggregation. `lambda` may be a graph node (learned temperature)
// or a fixed constant; the result is differentiable through both the weights
// and the V_i. Max routes its subgradient to the first argmax.
struct LambdaInput {
    std::optional<NodeId> node; // set in learned mode
    double value = 0.0;         // fixed mode constant

    static LambdaInput fixed(double v) { return {std::nullopt, v}; }
    static LambdaInput learned(NodeId n) { return {n, 0.0}; }
};

struct AggregateNodes {
    NodeId f;                     // the aggregate
    std::vector<NodeId> weights;  // softmax weight nodes (empty for max)
};

AggregateNodes aggregate_node(Graph& g, std::span<const NodeId> v, AggregationKind kind,
                              LambdaInput lambda);

// GMAN* objective: F(V, softplus(Lambda)) - c * softplus(Lambda), minimized
// jointly over the generator parameters and Lambda. Requires a soft kind.
struct GmanStarNodes {
    NodeId objective;
    NodeId f;
    NodeId lambda; // softplus(Lambda)
    std::vector<NodeId> weights;
};

GmanStarNodes gman_star_objective(Graph& g, std::span<const NodeId> v, NodeId raw_lambda, double c,
                                  AggregationKind kind);

} // namespace gman
