#include "gman/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gman {

AdamState AdamState::init(const Parameters& params, AdamConfig cfg) {
    AdamState s;
    s.cfg = cfg;
    for (const auto& it : params.items) {
        if (!it.trainable) continue;
        s.m.push_back(Tensor::zeros(it.value.shape));
        s.v.push_back(Tensor::zeros(it.value.shape));
    }
    return s;
}

void adam_step(Parameters& params, std::span<const Tensor> grads, AdamState& state) {
    std::size_t n = params.trainable_count();
    if (grads.size() != n || state.m.size() != n || state.v.size() != n) {
        throw std::invalid_argument("adam_step: got " + std::to_string(grads.size()) +
                                    " gradients for " + std::to_string(n) + " trainable tensors");
    }
    state.t += 1;
    double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    std::size_t slot = 0;
    for (auto& it : params.items) {
        if (!it.trainable) continue;
        const Tensor& g = grads[slot];
        if (!g.same_shape(it.value)) {
            throw std::invalid_argument("adam_step: gradient shape " + shape_str(g) +
                                        " does not match parameter '" + it.name + "' " +
                                        shape_str(it.value));
        }
        Tensor& m = state.m[slot];
        Tensor& v = state.v[slot];
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            m.data[i] = b1 * m.data[i] + (1.0 - b1) * g.data[i];
            v.data[i] = b2 * v.data[i] + (1.0 - b2) * g.data[i] * g.data[i];
            double mhat = m.data[i] / bc1;
            double vhat = v.data[i] / bc2;
            it.value.data[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
        ++slot;
    }
}

} // namespace gman
