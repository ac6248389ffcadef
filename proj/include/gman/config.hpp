#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gman/training.hpp"

namespace gman {

// Configuration file grammar: a single JSON object; see README for the field
// reference and configs/ for one canonical example per variant.
nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

TrainConfig load_config_file(const std::filesystem::path& path);
void save_config_file(const std::filesystem::path& path, const TrainConfig& cfg);

// Maps a variant name onto (aggregation kind, lambda mode, loss mode, N):
//   GAN       N=1, original loss, arithmetic mean (lambda 0)
//   mod-GAN   N=1, modified loss
//   GMAN-0    arithmetic softmax, fixed lambda 0
//   GMAN-max  hard max
//   GMAN-<x>  arithmetic softmax, fixed lambda = x (e.g. GMAN-1)
//   GMAN*     arithmetic softmax, generator-controlled lambda
// Everything else (dataset, widths, seeds, ...) comes from `base`.
TrainConfig expand_variant(const std::string& variant, TrainConfig base);

// Thrown on malformed configuration, carrying a field-level diagnostic.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gman
