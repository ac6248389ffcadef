#include "gman/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace gman {

Tensor LatentSampler::sample(std::size_t n, RngStream& rng) const {
    Tensor out = Tensor::zeros({n, dim});
    for (double& v : out.data) v = rng.uniform_open(-1.0, 1.0);
    return out;
}

MixtureSpec DatasetConfig::mixture() const {
    switch (kind) {
    case DatasetKind::Ring2d:
        return ring2d(ring_modes, ring_radius, ring_sigma);
    case DatasetKind::PointSet1d:
        return pointset1d(points, point_sigma);
    case DatasetKind::Idx:
        break;
    }
    throw std::logic_error("DatasetConfig: idx datasets have no mixture");
}

void DatasetConfig::validate() const {
    if (!(model_scale > 0.0)) throw std::invalid_argument("dataset: model_scale must be > 0");
    switch (kind) {
    case DatasetKind::Ring2d:
        if (ring_modes < 1) throw std::invalid_argument("dataset: ring modes must be >= 1");
        if (!(ring_sigma > 0.0)) throw std::invalid_argument("dataset: ring sigma must be > 0");
        break;
    case DatasetKind::PointSet1d:
        if (points.empty()) throw std::invalid_argument("dataset: point set is empty");
        if (!(point_sigma > 0.0)) throw std::invalid_argument("dataset: point sigma must be > 0");
        break;
    case DatasetKind::Idx:
        if (idx_images.empty()) throw std::invalid_argument("dataset: idx images path is empty");
        if (idx_downsample == 0) throw std::invalid_argument("dataset: idx downsample must be >= 1");
        break;
    }
}

DataSource DataSource::open(const DatasetConfig& cfg) {
    cfg.validate();
    DataSource src;
    src.cfg = cfg;
    if (cfg.is_mixture()) {
        src.mixture = cfg.mixture();
        src.mixture.validate();
        src.dim = src.mixture.dim;
    } else {
        IdxImageSet set = idx_load(cfg.idx_images, IdxKind::Images);
        src.images = rescale_to_unit(downsample(to_real(set), cfg.idx_downsample));
        src.dim = src.images.rows * src.images.cols;
    }
    return src;
}

Tensor DataSource::sample_model_space(std::size_t n, RngStream& rng) const {
    if (n == 0) throw std::invalid_argument("sample_model_space: n must be >= 1");
    if (cfg.is_mixture()) {
        Tensor x = sample_mixture(mixture, n, rng);
        double inv = 1.0 / cfg.model_scale;
        for (double& v : x.data) v *= inv;
        return x;
    }
    Tensor out = Tensor::zeros({n, dim});
    for (std::size_t s = 0; s < n; ++s) {
        std::size_t idx = static_cast<std::size_t>(rng.next_u64() % images.count);
        const double* src = images.pixels.data() + idx * dim;
        std::copy(src, src + dim, out.data.begin() + static_cast<long>(s * dim));
    }
    return out;
}

void TrainConfig::validate() const {
    dataset.validate();
    ensemble.validate();
    agg.validate();
    if (latent_dim == 0) throw std::invalid_argument("config: latent_dim must be >= 1");
    if (batch_size == 0) throw std::invalid_argument("config: batch_size must be >= 1");
    if (iterations <= 0) throw std::invalid_argument("config: iterations must be > 0");
    if (log_every <= 0) throw std::invalid_argument("config: log_every must be > 0");
    if (checkpoint_every < 0) throw std::invalid_argument("config: checkpoint_every must be >= 0");
    if (!(squash_eps > 0.0 && squash_eps < 0.5)) {
        throw std::invalid_argument("config: squash_eps must lie in (0, 0.5)");
    }
    if (!(gen_dropout >= 0.0 && gen_dropout < 1.0)) {
        throw std::invalid_argument("config: generator dropout must lie in [0,1)");
    }
    if (ensemble.split == SplitMode::Disjoint && batch_size % ensemble.n != 0) {
        throw std::invalid_argument("config: batch_size " + std::to_string(batch_size) +
                                    " not divisible by ensemble n " + std::to_string(ensemble.n) +
                                    " with disjoint splitting");
    }
    if (!(adam.lr > 0.0)) throw std::invalid_argument("config: learning rate must be > 0");
}

NetworkSpec generator_spec_for(const TrainConfig& cfg, std::size_t data_dim) {
    NetworkSpec spec;
    spec.widths.push_back(cfg.latent_dim);
    for (std::size_t w : cfg.gen_hidden) spec.widths.push_back(w);
    spec.widths.push_back(data_dim);
    spec.output = OutputActivation::Tanh;
    spec.dropout.assign(spec.hidden_count(), cfg.gen_dropout);
    spec.batchnorm.assign(spec.hidden_count(), cfg.gen_batchnorm);
    spec.validate();
    return spec;
}

NetworkSpec discriminator_base_for(const TrainConfig& cfg, std::size_t data_dim) {
    NetworkSpec spec;
    spec.widths.push_back(data_dim);
    for (std::size_t w : cfg.disc_hidden) spec.widths.push_back(w);
    spec.widths.push_back(1);
    spec.output = OutputActivation::None;
    spec.output_init_gain = cfg.disc_init_gain;
    spec.validate();
    return spec;
}

namespace {

void check_finite(double v, const char* what, std::int64_t iter) {
    if (!std::isfinite(v)) {
        throw TrainingAbort(iter, std::string(what) + " is non-finite (" + std::to_string(v) + ")");
    }
}

} // namespace

TrainState init_train_state(const TrainConfig& cfg) {
    cfg.validate();
    TrainState st;
    st.cfg = cfg;
    st.data = DataSource::open(cfg.dataset);
    st.latent.dim = cfg.latent_dim;

    st.gen_spec = generator_spec_for(cfg, st.data.dim);
    RngStream gen_init(derive_seed(cfg.seed, StreamPurpose::GeneratorInit));
    st.gen_params = init_mlp_parameters(st.gen_spec, gen_init);
    if (cfg.agg.lambda_mode == LambdaMode::Learned) {
        st.gen_params.add("agg.Lambda", Tensor::scalar(cfg.agg.lambda0));
    }
    st.gen_adam = AdamState::init(st.gen_params, cfg.adam);

    NetworkSpec disc_base = discriminator_base_for(cfg, st.data.dim);
    st.slots = build_ensemble(disc_base, cfg.ensemble, cfg.seed, cfg.adam);
    st.slot_dropout.reserve(st.slots.size());
    for (const auto& slot : st.slots) st.slot_dropout.emplace_back(slot.dropout_seed);

    st.data_rng = RngStream(derive_seed(cfg.seed, StreamPurpose::DataSampling));
    st.noise_d_rng = RngStream(derive_seed(cfg.seed, StreamPurpose::NoiseDiscPhase));
    st.noise_g_rng = RngStream(derive_seed(cfg.seed, StreamPurpose::NoiseGenPhase));
    st.gen_dropout_rng = RngStream(derive_seed(cfg.seed, StreamPurpose::DropoutGenerator));
    return st;
}

void discriminator_phase(TrainState& st, const Tensor& real, const Tensor& fake,
                         std::int64_t iter) {
    const double eps = st.cfg.squash_eps;
    const std::size_t n_disc = st.slots.size();
    std::vector<BatchSlice> slices = split_minibatch(real.shape[0], n_disc, st.cfg.ensemble.split);
    for (std::size_t i = 0; i < n_disc; ++i) {
        DiscriminatorSlot& slot = st.slots[i];
        Graph g;
        BoundMlp d(g, slot.spec, slot.params, Mode::Train);
        NodeId d_real = squashed_sigmoid_node(
            g, d.apply(g.leaf(slice_rows(real, slices[i])), &st.slot_dropout[i]), eps);
        NodeId d_fake = squashed_sigmoid_node(
            g, d.apply(g.leaf(slice_rows(fake, slices[i])), &st.slot_dropout[i]), eps);
        if (!g.value(d_real).all_finite() || !g.value(d_fake).all_finite()) {
            throw TrainingAbort(iter, "discriminator " + std::to_string(i) +
                                          " produced non-finite outputs");
        }
        ValueNodes v = value_estimate_node(g, d_real, d_fake);
        check_finite(g.value(v.v).data[0], "discriminator value", iter);
        g.backward(g.neg(v.v)); // ascend V_i
        adam_step(slot.params, d.trainable_grads(), slot.adam);
    }
}

LogRecord generator_phase(TrainState& st, const Tensor& real, std::int64_t iter) {
    const TrainConfig& cfg = st.cfg;
    const double eps = cfg.squash_eps;
    const std::size_t n_disc = st.slots.size();

    // Fresh noise; every discriminator judges the same full batches.
    Tensor noise_g = st.latent.sample(cfg.batch_size, st.noise_g_rng);
    Graph g;
    BoundMlp gen(g, st.gen_spec, st.gen_params, Mode::Train);
    NodeId gfake = gen.apply(g.leaf(noise_g), &st.gen_dropout_rng);
    if (!g.value(gfake).all_finite()) {
        throw TrainingAbort(iter, "generator produced non-finite samples");
    }

    Mode d_mode = cfg.gen_phase_dropout ? Mode::Train : Mode::Eval;
    std::vector<NodeId> vhat(n_disc), dfake(n_disc);
    for (std::size_t i = 0; i < n_disc; ++i) {
        DiscriminatorSlot& slot = st.slots[i];
        RngStream* drops = cfg.gen_phase_dropout ? &st.slot_dropout[i] : nullptr;
        // Real term: constant in the generator parameters, evaluated on a
        // forward-only pass so it still shifts V_i (and the soft weights).
        double real_term;
        {
            Graph sg;
            BoundMlp d(sg, slot.spec, slot.params, d_mode);
            NodeId dr = squashed_sigmoid_node(sg, d.apply(sg.leaf(real), drops), eps);
            real_term = sg.value(sg.mean_all(sg.log(dr))).data[0];
        }
        BoundMlp d(g, slot.spec, slot.params, d_mode);
        dfake[i] = squashed_sigmoid_node(g, d.apply(gfake, drops), eps);
        NodeId fake_term = g.mean_all(g.log(g.add_const(g.neg(dfake[i]), 1.0)));
        vhat[i] = g.add_const(fake_term, real_term);
        check_finite(g.value(vhat[i]).data[0], "aggregated value component", iter);
    }

    NodeId f_node, objective;
    std::optional<double> lambda_used, raw_lambda_used;
    std::vector<NodeId> weights;
    std::optional<NodeId> lambda_node;
    if (cfg.agg.lambda_mode == LambdaMode::Learned) {
        NodeId raw = gen.leaf("agg.Lambda");
        raw_lambda_used = g.value(raw).data[0];
        GmanStarNodes star = gman_star_objective(g, vhat, raw, cfg.agg.c, cfg.agg.kind);
        f_node = star.f;
        objective = star.objective;
        weights = star.weights;
        lambda_node = star.lambda;
        lambda_used = g.value(star.lambda).data[0];
        check_finite(*lambda_used, "lambda", iter);
    } else {
        AggregateNodes agg = aggregate_node(g, vhat, cfg.agg.kind, LambdaInput::fixed(cfg.agg.lambda));
        f_node = agg.f;
        objective = agg.f;
        weights = std::move(agg.weights);
    }

    if (cfg.loss_mode == LossMode::Modified) {
        // The descent direction swaps each fake term for -mean log D_i; the
        // softmax weights (or the argmax choice) still come from the V_i.
        if (cfg.agg.kind == AggregationKind::Max) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < n_disc; ++i) {
                if (g.value(vhat[i]).data[0] > g.value(vhat[best]).data[0]) best = i;
            }
            objective = generator_loss_node(g, dfake[best], LossMode::Modified);
        } else {
            std::vector<NodeId> terms(n_disc);
            for (std::size_t i = 0; i < n_disc; ++i) {
                terms[i] = g.mul(weights[i], generator_loss_node(g, dfake[i], LossMode::Modified));
            }
            objective = g.sum_all(g.concat(terms));
            if (lambda_node) objective = g.add(objective, g.scale(*lambda_node, -cfg.agg.c));
        }
    }

    check_finite(g.value(f_node).data[0], "aggregated objective F", iter);
    check_finite(g.value(objective).data[0], "generator objective", iter);
    g.backward(objective);
    adam_step(st.gen_params, gen.trainable_grads(), st.gen_adam);

    LogRecord rec;
    rec.iter = iter;
    rec.f = g.value(f_node).data[0];
    rec.v.resize(n_disc);
    for (std::size_t i = 0; i < n_disc; ++i) rec.v[i] = g.value(vhat[i]).data[0];
    rec.lambda = lambda_used;
    rec.raw_lambda = raw_lambda_used;
    return rec;
}

LogRecord train_step(TrainState& st) {
    auto t0 = std::chrono::steady_clock::now();
    const std::int64_t iter = st.iter + 1;
    const std::size_t batch = st.cfg.batch_size;

    Tensor real = st.data.sample_model_space(batch, st.data_rng);
    Tensor noise_d = st.latent.sample(batch, st.noise_d_rng);
    Tensor fake_d;
    {
        Graph g;
        NodeId out = mlp_forward(g, g.leaf(noise_d), st.gen_spec, st.gen_params, Mode::Train,
                                 &st.gen_dropout_rng);
        fake_d = g.value(out);
    }
    if (!fake_d.all_finite()) throw TrainingAbort(iter, "generator produced non-finite samples");

    discriminator_phase(st, real, fake_d, iter);
    LogRecord rec = generator_phase(st, real, iter);
    st.iter = iter;
    auto t1 = std::chrono::steady_clock::now();
    rec.ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    return rec;
}

RunLog train(const TrainConfig& cfg, const CheckpointSink& checkpoint_sink) {
    TrainState st = init_train_state(cfg);
    RunLog log;
    log.config = cfg;
    auto t0 = std::chrono::steady_clock::now();
    try {
        for (std::int64_t i = 0; i < cfg.iterations; ++i) {
            LogRecord rec = train_step(st);
            if (rec.iter % cfg.log_every == 0) log.records.push_back(std::move(rec));
            if (checkpoint_sink && cfg.checkpoint_every > 0 && st.iter % cfg.checkpoint_every == 0) {
                checkpoint_sink(st, st.iter);
            }
        }
    } catch (const TrainingAbort& abort) {
        log.aborted = true;
        log.anomalies.push_back(abort.what());
    }
    if (checkpoint_sink && !log.aborted) checkpoint_sink(st, st.iter);
    auto t1 = std::chrono::steady_clock::now();
    log.total_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    log.gen_spec = st.gen_spec;
    log.generator = std::move(st.gen_params);
    log.slots = std::move(st.slots);
    return log;
}

Tensor generate_model_space(const NetworkSpec& gen_spec, Parameters& gen_params, std::size_t n,
                            std::size_t latent_dim, RngStream& noise) {
    LatentSampler latent{latent_dim};
    Graph g;
    NodeId out = mlp_forward(g, g.leaf(latent.sample(n, noise)), gen_spec, gen_params, Mode::Eval);
    return g.value(out);
}

Tensor generate_data_space(double model_scale, const NetworkSpec& gen_spec, Parameters& gen_params,
                           std::size_t n, std::size_t latent_dim, RngStream& noise) {
    Tensor x = generate_model_space(gen_spec, gen_params, n, latent_dim, noise);
    for (double& v : x.data) v *= model_scale;
    return x;
}

} // namespace gman
