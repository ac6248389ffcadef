#include "gman/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gman {

namespace {

void check_negative(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("aggregate: empty utility vector");
    for (double x : v) {
        if (!(x < 0.0)) {
            throw std::invalid_argument("aggregate: soft kinds require V_i < 0, got " +
                                        std::to_string(x));
        }
    }
}

void check_lambda(double lambda) {
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("softmax_weights: lambda must be >= 0, got " +
                                    std::to_string(lambda));
    }
}

std::size_t argmax_index(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i; // strict: first index wins exact ties
    }
    return best;
}

} // namespace

void AggregationConfig::validate() const {
    if (lambda_mode == LambdaMode::Fixed) {
        if (kind != AggregationKind::Max && !(lambda >= 0.0)) {
            throw std::invalid_argument("AggregationConfig: fixed lambda must be >= 0");
        }
    } else {
        if (kind == AggregationKind::Max) {
            throw std::invalid_argument("AggregationConfig: learned lambda requires a soft kind");
        }
        if (!(c > 0.0)) throw std::invalid_argument("AggregationConfig: c must be > 0");
    }
}

std::vector<double> softmax_weights(std::span<const double> v, double lambda) {
    check_negative(v);
    check_lambda(lambda);
    std::vector<double> x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x[i] = lambda * v[i];
    double m = *std::max_element(x.begin(), x.end());
    double denom = 0.0;
    for (double& xi : x) {
        xi = std::exp(xi - m);
        denom += xi;
    }
    for (double& xi : x) xi /= denom;
    return x;
}

double lambda_reparam(double raw) {
    if (raw > 0.0) return raw + std::log1p(std::exp(-raw));
    return std::log1p(std::exp(raw));
}

double aggregate_value(std::span<const double> v, AggregationKind kind, double lambda) {
    if (v.empty()) throw std::invalid_argument("aggregate: empty utility vector");
    if (kind == AggregationKind::Max) {
        return v[argmax_index(v)];
    }
    check_negative(v);
    if (v.size() == 1) return v[0];
    std::vector<double> w = softmax_weights(v, lambda);
    switch (kind) {
    case AggregationKind::Am: {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * v[i];
        return s;
    }
    case AggregationKind::Gm: {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::log(-v[i]);
        return -std::exp(s);
    }
    case AggregationKind::Hm: {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += w[i] / v[i];
        return 1.0 / s;
    }
    case AggregationKind::Max:
        break;
    }
    throw std::logic_error("aggregate_value: unreachable");
}

AggregateNodes aggregate_node(Graph& g, std::span<const NodeId> v, AggregationKind kind,
                              LambdaInput lambda) {
    if (v.empty()) throw std::invalid_argument("aggregate: empty utility vector");
    std::vector<double> vals(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Tensor& t = g.value(v[i]);
        if (!t.is_scalar()) throw std::invalid_argument("aggregate: V_i must be scalar nodes");
        vals[i] = t.data[0];
    }
    if (kind == AggregationKind::Max) {
        return {v[argmax_index(vals)], {}};
    }
    check_negative(vals);
    if (!lambda.node) check_lambda(lambda.value);
    if (v.size() == 1) {
        // Every mean of a single element is that element, for any lambda.
        return {v[0], {g.leaf(Tensor::scalar(1.0))}};
    }

    // x_i = lambda * V_i, shifted by the running max as a detached constant;
    // the softmax is shift-invariant so gradients are unaffected.
    std::vector<NodeId> x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        x[i] = lambda.node ? g.mul(*lambda.node, v[i]) : g.scale(v[i], lambda.value);
    }
    double m = g.value(x[0]).data[0];
    for (NodeId xi : x) m = std::max(m, g.value(xi).data[0]);
    std::vector<NodeId> e(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) e[i] = g.exp(g.add_const(x[i], -m));
    NodeId denom = g.recip(g.sum_all(g.concat(e)));
    std::vector<NodeId> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = g.mul(e[i], denom);

    std::vector<NodeId> terms(v.size());
    NodeId f = -1;
    switch (kind) {
    case AggregationKind::Am:
        for (std::size_t i = 0; i < v.size(); ++i) terms[i] = g.mul(w[i], v[i]);
        f = g.sum_all(g.concat(terms));
        break;
    case AggregationKind::Gm:
        for (std::size_t i = 0; i < v.size(); ++i) terms[i] = g.mul(w[i], g.log(g.neg(v[i])));
        f = g.neg(g.exp(g.sum_all(g.concat(terms))));
        break;
    case AggregationKind::Hm:
        for (std::size_t i = 0; i < v.size(); ++i) terms[i] = g.mul(w[i], g.recip(v[i]));
        f = g.recip(g.sum_all(g.concat(terms)));
        break;
    case AggregationKind::Max:
        break;
    }
    return {f, std::move(w)};
}

GmanStarNodes gman_star_objective(Graph& g, std::span<const NodeId> v, NodeId raw_lambda, double c,
                                  AggregationKind kind) {
    if (kind == AggregationKind::Max) {
        throw std::invalid_argument("gman_star_objective: requires a soft aggregation kind");
    }
    if (!(c >= 0.0)) throw std::invalid_argument("gman_star_objective: c must be >= 0");
    NodeId lam = g.softplus(raw_lambda);
    AggregateNodes agg = aggregate_node(g, v, kind, LambdaInput::learned(lam));
    NodeId objective = g.add(agg.f, g.scale(lam, -c));
    return {objective, agg.f, lam, std::move(agg.weights)};
}

} // namespace gman
