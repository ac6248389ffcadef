#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gman/evaluation.hpp"
#include "gman/training.hpp"

namespace gman {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
    std::string run_id;
    std::string variant;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    std::string started_at;  // ISO 8601, UTC
    std::string finished_at;
    std::int64_t total_ms = 0;
    bool aborted = false;
    std::vector<std::string> anomalies;
    std::vector<std::pair<std::string, std::string>> artifacts; // name -> path relative to run dir
};

// Run directory layout:
//   runlog.csv                     iter,F,lambda,V_1..V_N,ms
//   config.json                    config snapshot
//   checkpoints/generator.gmanckpt
//   checkpoints/disc_<i>.gmanckpt
//   manifest.json                  written last; all referenced paths exist
//
// The runlog `ms` column is 0 unless timing is requested: measured wall-clock
// would break byte-level reproducibility of the CSV, so measured totals live
// in the manifest instead.
RunManifest persist_run(const RunLog& log, const std::filesystem::path& dir,
                        bool include_timing = false);

// Writes only the CSV (used for cadence checkpointing of partial logs).
void write_runlog_csv(const std::filesystem::path& path, const TrainConfig& cfg,
                      const std::vector<LogRecord>& records, bool include_timing);

std::vector<LogRecord> read_runlog_csv(const std::filesystem::path& path, const TrainConfig& cfg);

struct LoadedRun {
    std::filesystem::path dir;
    TrainedSystem system;
    std::vector<LogRecord> records;
    RunManifest manifest;
};

LoadedRun load_run(const std::filesystem::path& dir);

RunManifest read_manifest(const std::filesystem::path& path);

// Writes text atomically (temp file + rename).
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

std::string iso8601_utc_now();

} // namespace gman
