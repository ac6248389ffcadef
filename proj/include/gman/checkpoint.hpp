#pragma once

#include <filesystem>

#include "gman/net.hpp"

namespace gman {

// Flat binary checkpoint. Layout:
//   magic "GMANCKPT" (8 bytes), version u32 LE,
//   then per tensor until EOF: name length u64 LE, name bytes,
//   rank u64 LE, dims u64 LE each, payload f64 LE.
// Trainability is a naming convention, not part of the format: tensors named
// "*.bn.mean" / "*.bn.var" load as non-trainable running statistics.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Parameters& params);
Parameters load_checkpoint(const std::filesystem::path& path);

} // namespace gman
