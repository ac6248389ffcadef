#include "gman/evaluation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gman {

double TrainedSystem::effective_lambda() const {
    if (config.agg.lambda_mode == LambdaMode::Learned) {
        return lambda_reparam(const_cast<Parameters&>(generator).get("agg.Lambda").data[0]);
    }
    return config.agg.lambda;
}

TrainedSystem TrainedSystem::from_runlog(const RunLog& log) {
    TrainedSystem sys;
    sys.config = log.config;
    sys.gen_spec = log.gen_spec;
    sys.generator = log.generator;
    for (const auto& slot : log.slots) sys.discriminators.push_back({slot.spec, slot.params});
    return sys;
}

double gmam_score_from_components(double fa_gb, double fa_ga, double fb_ga, double fb_gb) {
    for (double f : {fa_gb, fa_ga, fb_ga, fb_gb}) {
        if (!(f < 0.0)) {
            throw std::invalid_argument("gmam: every aggregate must be negative, got " +
                                        std::to_string(f));
        }
    }
    return std::log((fa_gb / fa_ga) / (fb_ga / fb_gb));
}

namespace {

// Side's aggregate value of its ensemble judging one sample batch against the
// shared real batch, eval mode.
double side_aggregate(TrainedSystem& side, const Tensor& real, const Tensor& fake) {
    std::vector<double> v(side.discriminators.size());
    for (std::size_t i = 0; i < side.discriminators.size(); ++i) {
        EvalDiscriminator& d = side.discriminators[i];
        Graph g;
        BoundMlp net(g, d.spec, d.params, Mode::Eval);
        NodeId d_real = squashed_sigmoid_node(g, net.apply(g.leaf(real)), side.config.squash_eps);
        NodeId d_fake = squashed_sigmoid_node(g, net.apply(g.leaf(fake)), side.config.squash_eps);
        v[i] = value_estimate(g.value(d_real).data, g.value(d_fake).data).v;
    }
    return aggregate_value(v, side.config.agg.kind, side.effective_lambda());
}

} // namespace

GmamResult gmam(TrainedSystem& a, TrainedSystem& b, std::size_t n_eval, std::uint64_t eval_seed) {
    if (a.discriminators.empty() || b.discriminators.empty()) {
        throw std::invalid_argument("gmam: both runs must supply full discriminator ensembles");
    }
    DataSource data_a = DataSource::open(a.config.dataset);
    DataSource data_b = DataSource::open(b.config.dataset);
    if (data_a.dim != data_b.dim) {
        throw std::invalid_argument("gmam: incompatible data dimensions (" +
                                    std::to_string(data_a.dim) + " vs " +
                                    std::to_string(data_b.dim) + ")");
    }
    if (!(a.config.dataset == b.config.dataset)) {
        throw std::invalid_argument("gmam: runs were trained on different dataset configurations");
    }
    std::size_t n = n_eval != 0 ? n_eval : 10 * a.config.batch_size;

    RngStream real_rng(derive_seed(eval_seed, StreamPurpose::EvalData));
    Tensor real = data_a.sample_model_space(n, real_rng);

    // Both generators consume an identical copy of the evaluation noise
    // stream: comparisons are paired, and a run judged against itself gets
    // bitwise-identical samples on both sides (score exactly zero).
    RngStream za(derive_seed(eval_seed, StreamPurpose::EvalNoise));
    RngStream zb(derive_seed(eval_seed, StreamPurpose::EvalNoise));
    Tensor xa = generate_model_space(a.gen_spec, a.generator, n, a.config.latent_dim, za);
    Tensor xb = generate_model_space(b.gen_spec, b.generator, n, b.config.latent_dim, zb);

    GmamResult r;
    r.components.samples = n;
    r.components.fa_gb = side_aggregate(a, real, xb);
    r.components.fa_ga = side_aggregate(a, real, xa);
    r.components.fb_ga = side_aggregate(b, real, xa);
    r.components.fb_gb = side_aggregate(b, real, xb);
    r.score = gmam_score_from_components(r.components.fa_gb, r.components.fa_ga, r.components.fb_ga,
                                         r.components.fb_gb);
    return r;
}

std::vector<double> sliding_stdev(std::span<const double> series, std::size_t window) {
    if (window < 2) throw std::invalid_argument("sliding_stdev: window must be >= 2");
    if (window > series.size()) {
        throw std::invalid_argument("sliding_stdev: window " + std::to_string(window) +
                                    " exceeds series length " + std::to_string(series.size()));
    }
    std::vector<double> out;
    out.reserve(series.size() - window + 1);
    for (std::size_t j = 0; j + window <= series.size(); ++j) {
        double mean = 0.0;
        for (std::size_t k = 0; k < window; ++k) mean += series[j + k];
        mean /= static_cast<double>(window);
        double var = 0.0;
        for (std::size_t k = 0; k < window; ++k) {
            double d = series[j + k] - mean;
            var += d * d;
        }
        out.push_back(std::sqrt(var / static_cast<double>(window)));
    }
    return out;
}

std::optional<std::size_t> steady_state_index(std::span<const double> stdev_series,
                                              double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("steady_state: threshold must be > 0");
    std::optional<std::size_t> last_bad;
    for (std::size_t j = 0; j < stdev_series.size(); ++j) {
        if (!(stdev_series[j] < threshold)) last_bad = j;
    }
    if (!last_bad) return stdev_series.empty() ? std::nullopt : std::optional<std::size_t>(0);
    if (*last_bad + 1 >= stdev_series.size()) return std::nullopt;
    return *last_bad + 1;
}

ConvergenceReport convergence_report(std::span<const double> f_series,
                                     std::span<const std::int64_t> iterations, std::size_t window,
                                     double threshold) {
    if (f_series.size() != iterations.size()) {
        throw std::invalid_argument("convergence_report: series/iteration length mismatch");
    }
    ConvergenceReport rep;
    rep.window = window;
    rep.threshold = threshold;
    rep.stdev = sliding_stdev(f_series, window);
    rep.steady_index = steady_state_index(rep.stdev, threshold);
    if (rep.steady_index) {
        rep.steady_iteration = iterations[*rep.steady_index + window - 1];
    }
    return rep;
}

double run_variance(const std::vector<std::vector<double>>& f_series, std::size_t t) {
    if (f_series.size() < 2) throw std::invalid_argument("run_variance: need at least 2 runs");
    double mean = 0.0;
    for (const auto& s : f_series) {
        if (t >= s.size()) throw std::invalid_argument("run_variance: iteration index out of range");
        mean += s[t];
    }
    mean /= static_cast<double>(f_series.size());
    double var = 0.0;
    for (const auto& s : f_series) {
        double d = s[t] - mean;
        var += d * d;
    }
    return var / static_cast<double>(f_series.size() - 1);
}

ModeCoverage mode_coverage(const Tensor& samples, const MixtureSpec& mixture, double radius_mult,
                           std::size_t min_count) {
    mixture.validate();
    if (samples.rank() != 2 || samples.shape[0] == 0) {
        throw std::invalid_argument("mode_coverage: empty or non-[N,D] sample set");
    }
    if (samples.shape[1] != mixture.dim) {
        throw std::invalid_argument("mode_coverage: sample dimension " +
                                    std::to_string(samples.shape[1]) + " does not match mixture " +
                                    std::to_string(mixture.dim));
    }
    std::size_t n = samples.shape[0], dim = mixture.dim, k = mixture.centers.size();
    double radius2 = radius_mult * mixture.sigma * radius_mult * mixture.sigma;
    ModeCoverage cov;
    cov.total_modes = k;
    cov.per_mode.assign(k, 0);
    cov.samples = n;
    std::size_t in_radius = 0;
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t best = 0;
        double best_d2 = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = samples.data[s * dim + d] - mixture.centers[m][d];
                d2 += diff * diff;
            }
            if (m == 0 || d2 < best_d2) {
                best = m;
                best_d2 = d2;
            }
        }
        if (best_d2 <= radius2) {
            cov.per_mode[best] += 1;
            in_radius += 1;
        }
    }
    for (std::size_t m = 0; m < k; ++m) {
        if (cov.per_mode[m] >= min_count) cov.covered += 1;
    }
    cov.high_quality_fraction = static_cast<double>(in_radius) / static_cast<double>(n);
    return cov;
}

} // namespace gman
