#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gman/rng.hpp"
#include "gman/tensor.hpp"

namespace gman {

// Finite Gaussian mixture with shared isotropic stddev, in 1 or 2 dimensions.
struct MixtureSpec {
    std::size_t dim = 2;
    std::vector<std::vector<double>> centers;
    double sigma = 0.02;
    std::vector<double> weights; // simplex

    void validate() const;

    bool operator==(const MixtureSpec&) const = default;
};

// n samples, one row each: mixture component by weight, then an isotropic
// Gaussian perturbation with the shared sigma. Deterministic per stream.
Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, RngStream& rng);

// k centers equally spaced on the circle of the given radius, uniform weights.
MixtureSpec ring2d(std::size_t k, double radius, double sigma);

// One component per point, uniform weights.
MixtureSpec pointset1d(const std::vector<double>& points, double sigma);

// Shipped default: nine points in three loose clusters. The positions are an
// invented configuration (three clusters around -3.8, 0 and +3.5); override
// them freely in the run configuration.
const std::vector<double>& default_nine_points();

// IDX image/label container (raw bytes as stored on disk).
struct IdxImageSet {
    std::uint32_t count = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint8_t> pixels;
    std::optional<std::vector<std::uint8_t>> labels;
};

enum class IdxKind { Images, Labels };

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Reads an IDX file (big-endian magic/counts). Wrong magic or truncation is
// rejected with a byte-offset diagnostic.
IdxImageSet idx_load(const std::filesystem::path& path, IdxKind kind);
std::vector<std::uint8_t> idx_load_labels(const std::filesystem::path& path);

// Test-fixture writer; idx_load(idx_write(set)) round-trips.
void idx_write_images(const std::filesystem::path& path, const IdxImageSet& set);
void idx_write_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

// Images with real-valued pixels. `pixels` is byte-scaled (0..255) after
// downsampling and [-1,1] after rescale_to_unit.
struct RealImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pixels;
};

RealImages to_real(const IdxImageSet& set);

// factor x factor block averaging; rows and cols must be divisible by factor.
RealImages downsample(const RealImages& images, std::size_t factor);

// Affine map 0..255 -> [-1, 1], matching the generator's tanh codomain.
RealImages rescale_to_unit(const RealImages& images);

} // namespace gman
