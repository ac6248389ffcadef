#include "gman/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gman {

namespace {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

void check_eps(double eps) {
    if (eps < 0.0 || eps >= 0.5) {
        throw std::invalid_argument("squashed_sigmoid: eps must lie in [0, 0.5), got " +
                                    std::to_string(eps));
    }
}

void check_open_unit(std::span<const double> d, const char* which) {
    if (d.empty()) throw std::invalid_argument(std::string("value_estimate: empty ") + which + " batch");
    for (double v : d) {
        if (!(v > 0.0 && v < 1.0)) {
            throw std::invalid_argument(std::string("value_estimate: ") + which +
                                        " probability outside (0,1): " + std::to_string(v));
        }
    }
}

} // namespace

double squashed_sigmoid(double z, double eps) {
    check_eps(eps);
    return eps + (1.0 - 2.0 * eps) * logistic(z);
}

NodeId squashed_sigmoid_node(Graph& g, NodeId logits, double eps) {
    check_eps(eps);
    return g.add_const(g.scale(g.sigmoid(logits), 1.0 - 2.0 * eps), eps);
}

ValueEstimate value_estimate(std::span<const double> d_real, std::span<const double> d_fake) {
    check_open_unit(d_real, "real");
    check_open_unit(d_fake, "fake");
    ValueEstimate e;
    for (double v : d_real) e.real_term += std::log(v);
    e.real_term /= static_cast<double>(d_real.size());
    for (double v : d_fake) e.fake_term += std::log(1.0 - v);
    e.fake_term /= static_cast<double>(d_fake.size());
    e.v = e.real_term + e.fake_term;
    return e;
}

ValueNodes value_estimate_node(Graph& g, NodeId d_real, NodeId d_fake) {
    check_open_unit(g.value(d_real).data, "real");
    check_open_unit(g.value(d_fake).data, "fake");
    NodeId real_term = g.mean_all(g.log(d_real));
    NodeId fake_term = g.mean_all(g.log(g.add_const(g.neg(d_fake), 1.0)));
    return {g.add(real_term, fake_term), real_term, fake_term};
}

NodeId generator_loss_node(Graph& g, NodeId d_fake, LossMode mode) {
    check_open_unit(g.value(d_fake).data, "fake");
    if (mode == LossMode::Original) {
        return g.mean_all(g.log(g.add_const(g.neg(d_fake), 1.0)));
    }
    return g.neg(g.mean_all(g.log(d_fake)));
}

void DiscreteDistPair::validate() const {
    if (p_data.empty() || p_data.size() != p_g.size()) {
        throw std::invalid_argument("DiscreteDistPair: supports differ or empty");
    }
    for (const auto* vec : {&p_data, &p_g}) {
        double sum = 0.0;
        for (double v : *vec) {
            if (v < 0.0) throw std::invalid_argument("DiscreteDistPair: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("DiscreteDistPair: probabilities sum to " +
                                        std::to_string(sum) + ", not 1");
        }
    }
}

OptimalDiscriminatorResult optimal_discriminator_value(const DiscreteDistPair& pair) {
    pair.validate();
    double v_star = 0.0;
    for (std::size_t k = 0; k < pair.p_data.size(); ++k) {
        double p = pair.p_data[k], q = pair.p_g[k];
        if (p + q == 0.0) continue; // excluded support
        double d_star = p / (p + q);
        if (p > 0.0) v_star += p * std::log(d_star);
        if (q > 0.0) v_star += q * std::log(1.0 - d_star);
    }
    return {v_star, jensen_shannon(pair.p_data, pair.p_g)};
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("jensen_shannon: support size mismatch");
    auto kl_to_mid = [&](std::span<const double> a) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] > 0.0) s += a[k] * std::log(a[k] / (0.5 * (p[k] + q[k])));
        }
        return s;
    };
    return 0.5 * kl_to_mid(p) + 0.5 * kl_to_mid(q);
}

} // namespace gman
