#include "gman/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gman {

namespace {

constexpr char kMagic[8] = {'G', 'M', 'A', 'N', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    os.write(buf, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    os.write(buf, 8);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    char buf[4];
    if (!is.read(buf, 4)) throw std::runtime_error(std::string("checkpoint: truncated ") + what);
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

std::uint64_t get_u64(std::istream& is, const char* what) {
    char buf[8];
    if (!is.read(buf, 8)) throw std::runtime_error(std::string("checkpoint: truncated ") + what);
    std::uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}

bool is_running_stat(const std::string& name) {
    auto ends_with = [&](const char* suf) {
        std::string s(suf);
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    return ends_with("bn.mean") || ends_with("bn.var");
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const Parameters& params) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp.string() + " for writing");
        os.write(kMagic, 8);
        put_u32(os, kCheckpointVersion);
        for (const auto& it : params.items) {
            put_u64(os, it.name.size());
            os.write(it.name.data(), static_cast<std::streamsize>(it.name.size()));
            put_u64(os, it.value.rank());
            for (std::size_t d : it.value.shape) put_u64(os, d);
            os.write(reinterpret_cast<const char*>(it.value.data.data()),
                     static_cast<std::streamsize>(it.value.data.size() * sizeof(double)));
        }
        if (!os) throw std::runtime_error("checkpoint: write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Parameters load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
    }
    std::uint32_t version = get_u32(is, "version");
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    Parameters p;
    while (true) {
        char probe;
        if (!is.read(&probe, 1)) break; // clean EOF
        is.putback(probe);
        std::uint64_t name_len = get_u64(is, "name length");
        std::string name(name_len, '\0');
        if (!is.read(name.data(), static_cast<std::streamsize>(name_len))) {
            throw std::runtime_error("checkpoint: truncated tensor name");
        }
        std::uint64_t rank = get_u64(is, "rank");
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = get_u64(is, "dimension");
        std::size_t n = shape_numel(shape);
        std::vector<double> data(n);
        if (!is.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(n * sizeof(double)))) {
            throw std::runtime_error("checkpoint: truncated payload for tensor '" + name + "'");
        }
        bool trainable = !is_running_stat(name);
        p.add(name, Tensor(std::move(shape), std::move(data)), trainable);
    }
    return p;
}

} // namespace gman
