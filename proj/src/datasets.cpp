#include "gman/datasets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace gman {

void MixtureSpec::validate() const {
    if (dim != 1 && dim != 2) throw std::invalid_argument("MixtureSpec: dim must be 1 or 2");
    if (centers.empty()) throw std::invalid_argument("MixtureSpec: no centers");
    if (!(sigma > 0.0)) throw std::invalid_argument("MixtureSpec: sigma must be > 0");
    if (weights.size() != centers.size()) {
        throw std::invalid_argument("MixtureSpec: weights/centers size mismatch");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("MixtureSpec: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("MixtureSpec: weights sum to " + std::to_string(sum));
    }
    for (const auto& c : centers) {
        if (c.size() != dim) throw std::invalid_argument("MixtureSpec: center dimension mismatch");
    }
}

Tensor sample_mixture(const MixtureSpec& spec, std::size_t n, RngStream& rng) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("sample_mixture: n must be >= 1");
    Tensor out = Tensor::zeros({n, spec.dim});
    for (std::size_t s = 0; s < n; ++s) {
        double u = rng.uniform01();
        std::size_t comp = spec.centers.size() - 1;
        double acc = 0.0;
        for (std::size_t k = 0; k < spec.weights.size(); ++k) {
            acc += spec.weights[k];
            if (u < acc) {
                comp = k;
                break;
            }
        }
        for (std::size_t d = 0; d < spec.dim; ++d) {
            out.data[s * spec.dim + d] = rng.normal(spec.centers[comp][d], spec.sigma);
        }
    }
    return out;
}

MixtureSpec ring2d(std::size_t k, double radius, double sigma) {
    if (k < 1) throw std::invalid_argument("ring2d: k must be >= 1");
    MixtureSpec spec;
    spec.dim = 2;
    spec.sigma = sigma;
    constexpr double tau = 2.0 * 3.14159265358979323846;
    for (std::size_t i = 0; i < k; ++i) {
        double a = tau * static_cast<double>(i) / static_cast<double>(k);
        spec.centers.push_back({radius * std::cos(a), radius * std::sin(a)});
    }
    spec.weights.assign(k, 1.0 / static_cast<double>(k));
    return spec;
}

MixtureSpec pointset1d(const std::vector<double>& points, double sigma) {
    if (points.empty()) throw std::invalid_argument("pointset1d: need at least one point");
    MixtureSpec spec;
    spec.dim = 1;
    spec.sigma = sigma;
    for (double p : points) spec.centers.push_back({p});
    spec.weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    return spec;
}

const std::vector<double>& default_nine_points() {
    static const std::vector<double> pts = {-4.2, -3.8, -3.4, -0.4, 0.0, 0.4, 3.1, 3.5, 3.9};
    return pts;
}

namespace {

std::uint32_t read_be32(std::ifstream& is, const std::filesystem::path& path, std::size_t offset,
                        const char* what) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error("idx_load: " + path.string() + ": truncated " + what +
                                 " at byte offset " + std::to_string(offset));
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ofstream& os, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(buf), 4);
}

std::vector<std::uint8_t> read_payload(std::ifstream& is, const std::filesystem::path& path,
                                       std::size_t offset, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    if (!is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n))) {
        std::size_t got = static_cast<std::size_t>(is.gcount());
        throw std::runtime_error("idx_load: " + path.string() + ": payload truncated at byte offset " +
                                 std::to_string(offset + got) + " (expected " + std::to_string(n) +
                                 " bytes)");
    }
    return out;
}

} // namespace

IdxImageSet idx_load(const std::filesystem::path& path, IdxKind kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("idx_load: cannot open " + path.string());
    std::uint32_t magic = read_be32(is, path, 0, "magic");
    if (kind == IdxKind::Labels) {
        throw std::invalid_argument("idx_load: use idx_load_labels for label files");
    }
    if (magic != kIdxImagesMagic) {
        throw std::runtime_error("idx_load: " + path.string() + ": wrong magic 0x" +
                                 [&] {
                                     char buf[16];
                                     std::snprintf(buf, sizeof buf, "%08x", magic);
                                     return std::string(buf);
                                 }() +
                                 " at byte offset 0 (expected image magic 0x00000803)");
    }
    IdxImageSet set;
    set.count = read_be32(is, path, 4, "count");
    set.rows = read_be32(is, path, 8, "rows");
    set.cols = read_be32(is, path, 12, "cols");
    std::size_t n = static_cast<std::size_t>(set.count) * set.rows * set.cols;
    set.pixels = read_payload(is, path, 16, n);
    return set;
}

std::vector<std::uint8_t> idx_load_labels(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("idx_load: cannot open " + path.string());
    std::uint32_t magic = read_be32(is, path, 0, "magic");
    if (magic != kIdxLabelsMagic) {
        throw std::runtime_error("idx_load: " + path.string() +
                                 ": wrong magic at byte offset 0 (expected label magic 0x00000801)");
    }
    std::uint32_t count = read_be32(is, path, 4, "count");
    return read_payload(is, path, 8, count);
}

void idx_write_images(const std::filesystem::path& path, const IdxImageSet& set) {
    if (set.pixels.size() != static_cast<std::size_t>(set.count) * set.rows * set.cols) {
        throw std::invalid_argument("idx_write_images: pixel array length mismatch");
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("idx_write_images: cannot open " + path.string());
    write_be32(os, kIdxImagesMagic);
    write_be32(os, set.count);
    write_be32(os, set.rows);
    write_be32(os, set.cols);
    os.write(reinterpret_cast<const char*>(set.pixels.data()),
             static_cast<std::streamsize>(set.pixels.size()));
}

void idx_write_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("idx_write_labels: cannot open " + path.string());
    write_be32(os, kIdxLabelsMagic);
    write_be32(os, static_cast<std::uint32_t>(labels.size()));
    os.write(reinterpret_cast<const char*>(labels.data()),
             static_cast<std::streamsize>(labels.size()));
}

RealImages to_real(const IdxImageSet& set) {
    RealImages out;
    out.count = set.count;
    out.rows = set.rows;
    out.cols = set.cols;
    out.pixels.assign(set.pixels.begin(), set.pixels.end());
    return out;
}

RealImages downsample(const RealImages& images, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("downsample: factor must be >= 1");
    if (factor == 1) return images;
    if (images.rows % factor != 0 || images.cols % factor != 0) {
        throw std::invalid_argument("downsample: dimensions " + std::to_string(images.rows) + "x" +
                                    std::to_string(images.cols) + " not divisible by " +
                                    std::to_string(factor));
    }
    RealImages out;
    out.count = images.count;
    out.rows = images.rows / factor;
    out.cols = images.cols / factor;
    out.pixels.resize(out.count * out.rows * out.cols);
    double inv = 1.0 / static_cast<double>(factor * factor);
    for (std::size_t img = 0; img < images.count; ++img) {
        const double* src = images.pixels.data() + img * images.rows * images.cols;
        double* dst = out.pixels.data() + img * out.rows * out.cols;
        for (std::size_t r = 0; r < out.rows; ++r) {
            for (std::size_t c = 0; c < out.cols; ++c) {
                double acc = 0.0;
                for (std::size_t dr = 0; dr < factor; ++dr) {
                    for (std::size_t dc = 0; dc < factor; ++dc) {
                        acc += src[(r * factor + dr) * images.cols + (c * factor + dc)];
                    }
                }
                dst[r * out.cols + c] = acc * inv;
            }
        }
    }
    return out;
}

RealImages rescale_to_unit(const RealImages& images) {
    RealImages out = images;
    for (double& p : out.pixels) p = (p - 127.5) / 127.5;
    return out;
}

} // namespace gman
