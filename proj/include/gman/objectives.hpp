#pragma once

#include <span>
#include <vector>

#include "gman/graph.hpp"

namespace gman {

// Logistic sigmoid affinely compressed into [eps, 1-eps] so the logarithms
// in the minimax value never saturate. Requires 0 <= eps < 0.5.
double squashed_sigmoid(double z, double eps);
NodeId squashed_sigmoid_node(Graph& g, NodeId logits, double eps);

// Empirical two-term minimax value: mean log D over a real batch plus
// mean log(1-D) over a generated batch. All probabilities must lie strictly
// inside (0,1); the squashed sigmoid guarantees that upstream.
struct ValueEstimate {
    double v = 0.0;
    double real_term = 0.0;
    double fake_term = 0.0;
};

ValueEstimate value_estimate(std::span<const double> d_real, std::span<const double> d_fake);

struct ValueNodes {
    NodeId v;
    NodeId real_term;
    NodeId fake_term;
};

ValueNodes value_estimate_node(Graph& g, NodeId d_real, NodeId d_fake);

enum class LossMode { Original, Modified };

// Generator loss over discriminator outputs on generated samples.
// Original: mean log(1-d) (the generator descends this).
// Modified: mean -log(d).
NodeId generator_loss_node(Graph& g, NodeId d_fake, LossMode mode);

// Pair of discrete distributions on a shared finite support.
struct DiscreteDistPair {
    std::vector<double> p_data;
    std::vector<double> p_g;

    void validate() const; // throws on invalid simplex vectors
};

// Value of the analytically optimal discriminator D*(x) = p/(p+q) together
// with the Jensen-Shannon divergence, each computed independently. The two
// are linked by v_star = -log 4 + 2*jsd; callers check that identity, this
// function never derives one side from the other.
struct OptimalDiscriminatorResult {
    double v_star;
    double jsd;
};

OptimalDiscriminatorResult optimal_discriminator_value(const DiscreteDistPair& pair);

// Jensen-Shannon divergence via 0.5*KL(p||m) + 0.5*KL(q||m), m = (p+q)/2.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

} // namespace gman
