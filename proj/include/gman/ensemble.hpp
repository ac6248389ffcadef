#pragma once

#include <cstdint>
#include <vector>

#include "gman/adam.hpp"
#include "gman/net.hpp"

namespace gman {

enum class SplitMode { Shared, Disjoint };

struct EnsembleConfig {
    std::size_t n = 1;
    double dropout_lo = 0.3;
    double dropout_hi = 0.7;
    std::vector<std::size_t> width_divisors = {1}; // cycled over slots
    std::vector<bool> depth_variants = {false};    // cycled; true drops one hidden layer
    SplitMode split = SplitMode::Disjoint;

    void validate() const;

    bool operator==(const EnsembleConfig&) const = default;
};

// One discriminator: its own spec, parameters, optimizer state and dropout
// stream. Slots never share storage.
struct DiscriminatorSlot {
    std::size_t index = 0;
    NetworkSpec spec;
    Parameters params;
    AdamState adam;
    std::uint64_t dropout_seed = 0;
};

// Derives slot i's spec from the base: dropout lo + i*(hi-lo)/max(N-1,1) on
// every hidden layer, hidden widths divided by width_divisors[i mod len],
// last hidden layer removed when depth_variants[i mod len] is set.
NetworkSpec derive_slot_spec(const NetworkSpec& base, const EnsembleConfig& cfg, std::size_t i);

std::vector<DiscriminatorSlot> build_ensemble(const NetworkSpec& base, const EnsembleConfig& cfg,
                                              std::uint64_t master_seed, const AdamConfig& adam);

// Contiguous row range of a batch.
struct BatchSlice {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

// Shared: every slot sees all B rows. Disjoint: slot i gets the i-th block
// of B/n rows (B must be divisible by n); the blocks partition the batch.
std::vector<BatchSlice> split_minibatch(std::size_t batch, std::size_t n, SplitMode mode);

// Materializes the rows [slice.begin, slice.end) of a [B,F] tensor.
Tensor slice_rows(const Tensor& batch, BatchSlice slice);

} // namespace gman
