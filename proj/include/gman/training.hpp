#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gman/adam.hpp"
#include "gman/aggregation.hpp"
#include "gman/datasets.hpp"
#include "gman/ensemble.hpp"
#include "gman/net.hpp"
#include "gman/objectives.hpp"

namespace gman {

// Latent noise z ~ U(-1,1)^dim, sampled on the open cube.
struct LatentSampler {
    std::size_t dim = 64;
    Tensor sample(std::size_t n, RngStream& rng) const;
};

enum class DatasetKind { Ring2d, PointSet1d, Idx };

// Dataset selection plus the affine map between data space and the
// generator's tanh codomain: training happens on x/model_scale, generated
// samples map back as output*model_scale.
struct DatasetConfig {
    DatasetKind kind = DatasetKind::Ring2d;
    // ring2d
    std::size_t ring_modes = 8;
    double ring_radius = 2.0;
    double ring_sigma = 0.02;
    // pointset1d
    std::vector<double> points = default_nine_points();
    double point_sigma = 0.05;
    // idx
    std::string idx_images;
    std::size_t idx_downsample = 1;

    double model_scale = 2.5;

    MixtureSpec mixture() const; // mixture kinds only
    bool is_mixture() const { return kind != DatasetKind::Idx; }
    void validate() const;

    bool operator==(const DatasetConfig&) const = default;
};

struct TrainConfig {
    std::string variant; // informational label carried into logs/manifests
    DatasetConfig dataset;
    std::size_t latent_dim = 64;
    std::vector<std::size_t> gen_hidden = {64, 64};
    bool gen_batchnorm = true;
    double gen_dropout = 0.0;
    std::vector<std::size_t> disc_hidden = {64, 64};
    double disc_init_gain = 1.0; // scales the discriminator output-layer init
    EnsembleConfig ensemble;
    AggregationConfig agg;
    LossMode loss_mode = LossMode::Original;
    std::size_t batch_size = 100;
    std::int64_t iterations = 10000;
    AdamConfig adam;
    double squash_eps = 0.01;
    // Dropout state of the discriminator forwards inside the generator phase.
    // true replays training-mode masks; false uses each discriminator's
    // dropout-averaged (eval) network for the generator's objective.
    bool gen_phase_dropout = true;
    std::uint64_t seed = 1;
    std::int64_t log_every = 1;
    std::int64_t checkpoint_every = 0; // 0 = final checkpoint only

    void validate() const;

    bool operator==(const TrainConfig&) const = default;
};

struct LogRecord {
    std::int64_t iter = 0; // 1-based
    double f = 0.0;        // aggregated objective, logged in full
    std::vector<double> v; // per-discriminator values
    std::optional<double> lambda; // learned mode only: softplus(Lambda) used this step
    std::optional<double> raw_lambda; // learned mode only: Lambda before the update
    std::int64_t ms = 0;   // measured step wall-clock
};

struct RunLog {
    TrainConfig config;
    std::vector<LogRecord> records;
    NetworkSpec gen_spec;
    Parameters generator; // final, includes "agg.Lambda" in learned mode
    std::vector<DiscriminatorSlot> slots;
    bool aborted = false;
    std::vector<std::string> anomalies;
    std::int64_t total_ms = 0;
};

// Resolved dataset: a validated mixture or loaded image set, plus the
// model-space sampling entry point shared by training and evaluation.
struct DataSource {
    DatasetConfig cfg;
    MixtureSpec mixture; // mixture kinds
    RealImages images;   // idx kind, downsampled and rescaled
    std::size_t dim = 0;

    static DataSource open(const DatasetConfig& cfg);
    Tensor sample_model_space(std::size_t n, RngStream& rng) const;
};

struct TrainState {
    TrainConfig cfg;
    DataSource data;
    LatentSampler latent;
    NetworkSpec gen_spec;
    Parameters gen_params;
    AdamState gen_adam;
    std::vector<DiscriminatorSlot> slots;
    std::vector<RngStream> slot_dropout;
    RngStream data_rng, noise_d_rng, noise_g_rng, gen_dropout_rng;
    std::int64_t iter = 0;
};

// Raised when a loss or temperature goes non-finite; train() converts it
// into an aborted RunLog with the diagnostic preserved.
struct TrainingAbort : std::runtime_error {
    std::int64_t iter;
    TrainingAbort(std::int64_t it, const std::string& msg)
        : std::runtime_error("iteration " + std::to_string(it) + ": " + msg), iter(it) {}
};

// Network specs implied by a config for a given data dimension.
NetworkSpec generator_spec_for(const TrainConfig& cfg, std::size_t data_dim);
NetworkSpec discriminator_base_for(const TrainConfig& cfg, std::size_t data_dim);

TrainState init_train_state(const TrainConfig& cfg);

// The two halves of a training step. The discriminator phase gives each
// slot one ascent step on its own value over its routed minibatch (generator
// frozen); the generator phase draws fresh noise and descends the aggregated
// objective (and Lambda in learned mode) with every discriminator frozen.
void discriminator_phase(TrainState& st, const Tensor& real, const Tensor& fake,
                         std::int64_t iter);
LogRecord generator_phase(TrainState& st, const Tensor& real, std::int64_t iter);

// One alternating step: sample, route, discriminator phase, generator phase.
LogRecord train_step(TrainState& st);

// Runs the configured number of steps. `checkpoint_sink`, when set, is
// called at the configured cadence and once at the end.
using CheckpointSink = std::function<void(const TrainState&, std::int64_t iter)>;
RunLog train(const TrainConfig& cfg, const CheckpointSink& checkpoint_sink = nullptr);

// Generator samples in model space ([-1,1]^d), eval mode.
Tensor generate_model_space(const NetworkSpec& gen_spec, Parameters& gen_params, std::size_t n,
                            std::size_t latent_dim, RngStream& noise);

// Generator samples mapped back to data space (model output * model_scale).
Tensor generate_data_space(double model_scale, const NetworkSpec& gen_spec, Parameters& gen_params,
                           std::size_t n, std::size_t latent_dim, RngStream& noise);

} // namespace gman
