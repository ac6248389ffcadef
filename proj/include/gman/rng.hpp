#pragma once

#include <cstdint>

namespace gman {

// Stream purposes for the counter-based seed derivation. A run's master seed
// fans out to one independent stream per (purpose, index) pair, so changing
// the ensemble size N never perturbs the data/noise streams.
enum class StreamPurpose : std::uint64_t {
    GeneratorInit = 0,
    DiscriminatorInit = 1, // indexed by slot
    DataSampling = 2,
    NoiseDiscPhase = 3,
    NoiseGenPhase = 4,
    DropoutSlot = 5, // indexed by slot
    DropoutGenerator = 6,
    EvalNoise = 7,
    EvalData = 8,
    CoverageNoise = 9,
};

std::uint64_t splitmix64(std::uint64_t x);

// derive_seed(master, purpose, index) = splitmix64 applied to the master seed
// mixed with the purpose and index counters. Documented contract: the stream
// for a given (master, purpose, index) never depends on any other stream.
std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose, std::uint64_t index = 0);

// Deterministic random stream. Generation is hand-rolled (xoshiro-style state
// via splitmix64-seeded mt19937_64 would pull in libstdc++ distribution
// internals; these draws are pinned bit-for-bit by this file alone).
class RngStream {
public:
    RngStream() : RngStream(0) {}
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();

    // Uniform on [lo, hi).
    double uniform(double lo, double hi);

    // Uniform on the open interval (lo, hi); the boundary draw (probability
    // 2^-53) is rejected and redrawn.
    double uniform_open(double lo, double hi);

    // Standard Box-Muller normal; caches the spare deviate.
    double normal(double mean, double stddev);

    bool bernoulli(double p);

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gman
