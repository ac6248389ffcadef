#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gman/net.hpp"
#include "gman/tensor.hpp"

namespace gman {

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;

    bool operator==(const AdamConfig&) const = default;
};

// Bias-corrected Adam state over the trainable tensors of one parameter set.
struct AdamState {
    AdamConfig cfg;
    std::int64_t t = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState init(const Parameters& params, AdamConfig cfg);
};

// One bias-corrected Adam update. `grads` must be parallel to the trainable
// items of `params` (shape-checked). Advances state.t by exactly 1. Pure
// function of (params, grads, state) - no hidden inputs.
void adam_step(Parameters& params, std::span<const Tensor> grads, AdamState& state);

} // namespace gman
