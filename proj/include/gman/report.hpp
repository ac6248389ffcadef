#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gman/runio.hpp"

namespace gman {

struct ReportOptions {
    std::size_t window = 500;
    double threshold_frac = 0.1; // family threshold = frac * median first-window stdev
    std::size_t coverage_samples = 10000;
    double coverage_radius_mult = 3.0;
    std::size_t coverage_min_count = 20;
    std::uint64_t eval_seed = 2026;
    bool deterministic_plots = false;
};

struct FamilySummary {
    std::string family;
    std::vector<std::string> run_ids;
    double threshold = 0.0;
    std::vector<std::int64_t> steady_iterations; // -1 when not reached, per run
};

// Emits f_curves.csv, sliding_stdev.csv, steady_state.csv, lambda.csv,
// mode_coverage.csv and the corresponding SVG plots into out_dir. Runs are
// grouped into families by variant name; every run must share one iteration
// grid.
std::vector<FamilySummary> write_report(const std::vector<LoadedRun*>& runs,
                                        const std::filesystem::path& out_dir,
                                        const ReportOptions& opts);

struct TournamentCell {
    double mean = 0.0;
    double stdev = 0.0;
    std::size_t pairs = 0;
};

struct Tournament {
    std::vector<std::string> variants;
    std::vector<std::vector<TournamentCell>> cells; // [row][col], antisymmetric in mean
    std::vector<double> column_scores;              // summed per column
};

// Pairwise tournament over runs grouped by variant; seeds are paired by rank
// within each variant and each unordered pair is evaluated once (the mirror
// cell is the exact negation). Emits a matrix CSV (mean+-stdev cells, summed
// score column) plus a long-format pair CSV.
Tournament gmam_tournament(std::vector<LoadedRun>& runs, std::size_t n_eval,
                           std::uint64_t eval_seed);

void write_tournament_csv(const Tournament& t, const std::filesystem::path& matrix_csv,
                          const std::filesystem::path& pairs_csv,
                          const std::vector<std::string>& pair_rows);

// Minimal polyline SVG plot; `series` maps a label to (x, y) points.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::map<std::string, std::vector<std::pair<double, double>>>& series,
                    bool deterministic);

} // namespace gman
