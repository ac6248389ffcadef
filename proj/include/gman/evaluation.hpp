#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gman/training.hpp"

namespace gman {

struct EvalDiscriminator {
    NetworkSpec spec;
    Parameters params;
};

// Everything needed to let one trained system judge generators: its own
// aggregation settings plus generator and discriminator weights.
struct TrainedSystem {
    TrainConfig config;
    NetworkSpec gen_spec;
    Parameters generator;
    std::vector<EvalDiscriminator> discriminators;

    // Fixed lambda, or softplus of the learned raw parameter.
    double effective_lambda() const;

    static TrainedSystem from_runlog(const RunLog& log);
};

struct GmamComponents {
    double fa_gb = 0.0; // side a's aggregate on samples from G_b
    double fa_ga = 0.0;
    double fb_ga = 0.0;
    double fb_gb = 0.0;
    std::size_t samples = 0;
};

struct GmamResult {
    double score = 0.0;
    GmamComponents components;
};

// score = log( (fa_gb / fa_ga) / (fb_ga / fb_gb) ). Every component must be
// negative; positive scores favor side b's generator.
double gmam_score_from_components(double fa_gb, double fa_ga, double fb_ga, double fb_gb);

// Evaluates both ensembles on one held-out real batch and one sample batch
// per generator (identical across the four aggregate evaluations), eval mode
// throughout. n_eval == 0 selects 10x the training batch size.
GmamResult gmam(TrainedSystem& a, TrainedSystem& b, std::size_t n_eval, std::uint64_t eval_seed);

// Population standard deviation over each window of `window` consecutive
// entries; output[j] covers series[j .. j+window-1].
std::vector<double> sliding_stdev(std::span<const double> series, std::size_t window);

// First index at which the stdev series drops below the threshold and stays
// below it for the rest of the series.
std::optional<std::size_t> steady_state_index(std::span<const double> stdev_series,
                                              double threshold);

struct ConvergenceReport {
    std::size_t window = 0;
    double threshold = 0.0;
    std::vector<double> stdev;
    std::optional<std::size_t> steady_index;      // index into `stdev`
    std::optional<std::int64_t> steady_iteration; // iteration closing the qualifying window
};

ConvergenceReport convergence_report(std::span<const double> f_series,
                                     std::span<const std::int64_t> iterations, std::size_t window,
                                     double threshold);

// Cross-run sample variance of F at one time index; needs >= 2 series.
double run_variance(const std::vector<std::vector<double>>& f_series, std::size_t t);

struct ModeCoverage {
    std::size_t covered = 0;
    std::size_t total_modes = 0;
    std::vector<std::size_t> per_mode; // in-radius sample counts
    double high_quality_fraction = 0.0;
    std::size_t samples = 0;
};

// Assigns each sample (data space) to its nearest mixture center; a mode
// counts as covered once at least min_count samples land within
// radius_mult * sigma of it.
ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& mixture, double radius_mult,
                           std::size_t min_count);

} // namespace gman
