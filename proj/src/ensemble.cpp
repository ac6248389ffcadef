#include "gman/ensemble.hpp"

#include <stdexcept>
#include <string>

namespace gman {

void EnsembleConfig::validate() const {
    if (n < 1) throw std::invalid_argument("EnsembleConfig: n must be >= 1");
    if (!(dropout_lo >= 0.0 && dropout_hi < 1.0 && dropout_lo <= dropout_hi)) {
        throw std::invalid_argument("EnsembleConfig: dropout range must satisfy 0 <= lo <= hi < 1");
    }
    if (width_divisors.empty()) throw std::invalid_argument("EnsembleConfig: empty width divisors");
    for (std::size_t d : width_divisors) {
        if (d == 0) throw std::invalid_argument("EnsembleConfig: zero width divisor");
    }
    if (depth_variants.empty()) throw std::invalid_argument("EnsembleConfig: empty depth variants");
}

NetworkSpec derive_slot_spec(const NetworkSpec& base, const EnsembleConfig& cfg, std::size_t i) {
    base.validate();
    cfg.validate();
    NetworkSpec spec = base;

    std::size_t div = cfg.width_divisors[i % cfg.width_divisors.size()];
    for (std::size_t l = 1; l + 1 < spec.widths.size(); ++l) {
        std::size_t w = spec.widths[l] / div;
        if (w == 0) {
            throw std::invalid_argument("build_ensemble: width divisor " + std::to_string(div) +
                                        " reduces hidden width " + std::to_string(spec.widths[l]) +
                                        " to zero (slot " + std::to_string(i) + ")");
        }
        spec.widths[l] = w;
    }

    if (cfg.depth_variants[i % cfg.depth_variants.size()]) {
        if (spec.hidden_count() == 0) {
            throw std::invalid_argument("build_ensemble: depth variant on a network with no hidden layer");
        }
        spec.widths.erase(spec.widths.end() - 2); // drop the last hidden layer
    }

    double lo = cfg.dropout_lo, hi = cfg.dropout_hi;
    double rate = lo;
    if (cfg.n > 1) rate = lo + static_cast<double>(i) * (hi - lo) / static_cast<double>(cfg.n - 1);
    spec.dropout.assign(spec.hidden_count(), rate);
    spec.batchnorm.resize(spec.hidden_count(), false);

    spec.validate();
    return spec;
}

std::vector<DiscriminatorSlot> build_ensemble(const NetworkSpec& base, const EnsembleConfig& cfg,
                                              std::uint64_t master_seed, const AdamConfig& adam) {
    base.validate();
    cfg.validate();
    std::vector<DiscriminatorSlot> slots;
    slots.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        DiscriminatorSlot slot;
        slot.index = i;
        slot.spec = derive_slot_spec(base, cfg, i);
        RngStream init(derive_seed(master_seed, StreamPurpose::DiscriminatorInit, i));
        slot.params = init_mlp_parameters(slot.spec, init);
        slot.adam = AdamState::init(slot.params, adam);
        slot.dropout_seed = derive_seed(master_seed, StreamPurpose::DropoutSlot, i);
        slots.push_back(std::move(slot));
    }
    return slots;
}

std::vector<BatchSlice> split_minibatch(std::size_t batch, std::size_t n, SplitMode mode) {
    if (n < 1) throw std::invalid_argument("split_minibatch: n must be >= 1");
    if (batch == 0) throw std::invalid_argument("split_minibatch: empty batch");
    std::vector<BatchSlice> out;
    out.reserve(n);
    if (mode == SplitMode::Shared) {
        for (std::size_t i = 0; i < n; ++i) out.push_back({0, batch});
        return out;
    }
    if (batch % n != 0) {
        throw std::invalid_argument("split_minibatch: batch size " + std::to_string(batch) +
                                    " not divisible by " + std::to_string(n) + " in disjoint mode");
    }
    std::size_t block = batch / n;
    for (std::size_t i = 0; i < n; ++i) out.push_back({i * block, (i + 1) * block});
    return out;
}

Tensor slice_rows(const Tensor& batch, BatchSlice slice) {
    if (batch.rank() != 2) throw std::invalid_argument("slice_rows: expected [B,F] tensor");
    std::size_t cols = batch.shape[1];
    if (slice.end > batch.shape[0] || slice.begin > slice.end) {
        throw std::invalid_argument("slice_rows: slice out of range");
    }
    Tensor out = Tensor::zeros({slice.size(), cols});
    std::copy(batch.data.begin() + static_cast<long>(slice.begin * cols),
              batch.data.begin() + static_cast<long>(slice.end * cols), out.data.begin());
    return out;
}

} // namespace gman
