#include "gman/config.hpp"

#include <fstream>

namespace gman {

using nlohmann::json;

namespace {

std::string kind_str(AggregationKind k) {
    switch (k) {
    case AggregationKind::Max: return "max";
    case AggregationKind::Am: return "am";
    case AggregationKind::Gm: return "gm";
    case AggregationKind::Hm: return "hm";
    }
    return "?";
}

AggregationKind kind_from(const std::string& s, const char* field) {
    if (s == "max") return AggregationKind::Max;
    if (s == "am") return AggregationKind::Am;
    if (s == "gm") return AggregationKind::Gm;
    if (s == "hm") return AggregationKind::Hm;
    throw ConfigError(std::string("config field '") + field + "': unknown aggregation kind '" + s +
                      "' (expected max|am|gm|hm)");
}

template <typename T>
T get_field(const json& j, const char* field, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + field + "': " + e.what());
    }
}

template <typename T>
T require_field(const json& j, const char* field) {
    if (!j.contains(field)) {
        throw ConfigError(std::string("config field '") + field + "' is required");
    }
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field '") + field + "': " + e.what());
    }
}

} // namespace

json config_to_json(const TrainConfig& cfg) {
    json j;
    j["variant"] = cfg.variant;

    json d;
    switch (cfg.dataset.kind) {
    case DatasetKind::Ring2d:
        d["kind"] = "ring2d";
        d["modes"] = cfg.dataset.ring_modes;
        d["radius"] = cfg.dataset.ring_radius;
        d["sigma"] = cfg.dataset.ring_sigma;
        break;
    case DatasetKind::PointSet1d:
        d["kind"] = "pointset1d";
        d["points"] = cfg.dataset.points;
        d["sigma"] = cfg.dataset.point_sigma;
        break;
    case DatasetKind::Idx:
        d["kind"] = "idx";
        d["images"] = cfg.dataset.idx_images;
        d["downsample"] = cfg.dataset.idx_downsample;
        break;
    }
    d["model_scale"] = cfg.dataset.model_scale;
    j["dataset"] = d;

    j["latent_dim"] = cfg.latent_dim;
    j["generator"] = {{"hidden", cfg.gen_hidden},
                      {"batchnorm", cfg.gen_batchnorm},
                      {"dropout", cfg.gen_dropout}};
    json e;
    e["n"] = cfg.ensemble.n;
    e["hidden"] = cfg.disc_hidden;
    e["dropout_range"] = {cfg.ensemble.dropout_lo, cfg.ensemble.dropout_hi};
    e["init_gain"] = cfg.disc_init_gain;
    e["width_divisors"] = cfg.ensemble.width_divisors;
    e["depth_variants"] = cfg.ensemble.depth_variants;
    e["split"] = cfg.ensemble.split == SplitMode::Disjoint ? "disjoint" : "shared";
    j["ensemble"] = e;

    json a;
    a["kind"] = kind_str(cfg.agg.kind);
    if (cfg.agg.lambda_mode == LambdaMode::Learned) {
        a["lambda"] = "learned";
        a["c"] = cfg.agg.c;
        a["lambda0"] = cfg.agg.lambda0;
    } else {
        a["lambda"] = cfg.agg.lambda;
    }
    j["aggregation"] = a;

    j["loss_mode"] = cfg.loss_mode == LossMode::Modified ? "modified" : "original";
    j["batch_size"] = cfg.batch_size;
    j["iterations"] = cfg.iterations;
    j["optimizer"] = {{"lr", cfg.adam.lr},
                      {"beta1", cfg.adam.beta1},
                      {"beta2", cfg.adam.beta2},
                      {"eps", cfg.adam.eps}};
    j["squash_eps"] = cfg.squash_eps;
    j["gen_phase_dropout"] = cfg.gen_phase_dropout;
    j["seed"] = cfg.seed;
    j["log_every"] = cfg.log_every;
    j["checkpoint_every"] = cfg.checkpoint_every;
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.variant = get_field<std::string>(j, "variant", "");

    if (!j.contains("dataset") || !j.at("dataset").is_object()) {
        throw ConfigError("config field 'dataset' is required and must be an object");
    }
    const json& d = j.at("dataset");
    std::string dk = require_field<std::string>(d, "kind");
    if (dk == "ring2d") {
        cfg.dataset.kind = DatasetKind::Ring2d;
        cfg.dataset.ring_modes = get_field<std::size_t>(d, "modes", cfg.dataset.ring_modes);
        cfg.dataset.ring_radius = get_field<double>(d, "radius", cfg.dataset.ring_radius);
        cfg.dataset.ring_sigma = get_field<double>(d, "sigma", cfg.dataset.ring_sigma);
    } else if (dk == "pointset1d") {
        cfg.dataset.kind = DatasetKind::PointSet1d;
        cfg.dataset.points = get_field<std::vector<double>>(d, "points", cfg.dataset.points);
        cfg.dataset.point_sigma = get_field<double>(d, "sigma", cfg.dataset.point_sigma);
        cfg.dataset.model_scale = 6.0; // overridable default for the nine-point set
    } else if (dk == "idx") {
        cfg.dataset.kind = DatasetKind::Idx;
        cfg.dataset.idx_images = require_field<std::string>(d, "images");
        cfg.dataset.idx_downsample = get_field<std::size_t>(d, "downsample", 1);
        cfg.dataset.model_scale = 1.0; // pixels are already rescaled to [-1,1]
    } else {
        throw ConfigError("config field 'dataset.kind': unknown kind '" + dk +
                          "' (expected ring2d|pointset1d|idx)");
    }
    cfg.dataset.model_scale = get_field<double>(d, "model_scale", cfg.dataset.model_scale);

    cfg.latent_dim = get_field<std::size_t>(j, "latent_dim", cfg.latent_dim);
    if (j.contains("generator")) {
        const json& gj = j.at("generator");
        cfg.gen_hidden = get_field<std::vector<std::size_t>>(gj, "hidden", cfg.gen_hidden);
        cfg.gen_batchnorm = get_field<bool>(gj, "batchnorm", cfg.gen_batchnorm);
        cfg.gen_dropout = get_field<double>(gj, "dropout", cfg.gen_dropout);
    }
    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        cfg.ensemble.n = get_field<std::size_t>(e, "n", cfg.ensemble.n);
        cfg.disc_hidden = get_field<std::vector<std::size_t>>(e, "hidden", cfg.disc_hidden);
        cfg.disc_init_gain = get_field<double>(e, "init_gain", cfg.disc_init_gain);
        if (e.contains("dropout_range")) {
            auto r = get_field<std::vector<double>>(e, "dropout_range", {});
            if (r.size() != 2) {
                throw ConfigError("config field 'ensemble.dropout_range': expected [lo, hi]");
            }
            cfg.ensemble.dropout_lo = r[0];
            cfg.ensemble.dropout_hi = r[1];
        }
        cfg.ensemble.width_divisors =
            get_field<std::vector<std::size_t>>(e, "width_divisors", cfg.ensemble.width_divisors);
        cfg.ensemble.depth_variants =
            get_field<std::vector<bool>>(e, "depth_variants", cfg.ensemble.depth_variants);
        std::string split = get_field<std::string>(e, "split", "disjoint");
        if (split == "disjoint") {
            cfg.ensemble.split = SplitMode::Disjoint;
        } else if (split == "shared") {
            cfg.ensemble.split = SplitMode::Shared;
        } else {
            throw ConfigError("config field 'ensemble.split': expected disjoint|shared");
        }
    }
    if (j.contains("aggregation")) {
        const json& a = j.at("aggregation");
        cfg.agg.kind = kind_from(get_field<std::string>(a, "kind", "am"), "aggregation.kind");
        if (a.contains("lambda") && a.at("lambda").is_string()) {
            if (a.at("lambda").get<std::string>() != "learned") {
                throw ConfigError("config field 'aggregation.lambda': expected a number or \"learned\"");
            }
            cfg.agg.lambda_mode = LambdaMode::Learned;
            cfg.agg.c = get_field<double>(a, "c", cfg.agg.c);
            cfg.agg.lambda0 = get_field<double>(a, "lambda0", cfg.agg.lambda0);
        } else {
            cfg.agg.lambda_mode = LambdaMode::Fixed;
            cfg.agg.lambda = get_field<double>(a, "lambda", 0.0);
        }
    }
    std::string loss = get_field<std::string>(j, "loss_mode", "original");
    if (loss == "original") {
        cfg.loss_mode = LossMode::Original;
    } else if (loss == "modified") {
        cfg.loss_mode = LossMode::Modified;
    } else {
        throw ConfigError("config field 'loss_mode': expected original|modified");
    }
    cfg.batch_size = get_field<std::size_t>(j, "batch_size", cfg.batch_size);
    cfg.iterations = get_field<std::int64_t>(j, "iterations", cfg.iterations);
    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        cfg.adam.lr = get_field<double>(o, "lr", cfg.adam.lr);
        cfg.adam.beta1 = get_field<double>(o, "beta1", cfg.adam.beta1);
        cfg.adam.beta2 = get_field<double>(o, "beta2", cfg.adam.beta2);
        cfg.adam.eps = get_field<double>(o, "eps", cfg.adam.eps);
    }
    cfg.squash_eps = get_field<double>(j, "squash_eps", cfg.squash_eps);
    cfg.gen_phase_dropout = get_field<bool>(j, "gen_phase_dropout", cfg.gen_phase_dropout);
    cfg.seed = get_field<std::uint64_t>(j, "seed", cfg.seed);
    cfg.log_every = get_field<std::int64_t>(j, "log_every", cfg.log_every);
    cfg.checkpoint_every = get_field<std::int64_t>(j, "checkpoint_every", cfg.checkpoint_every);

    if (!cfg.variant.empty()) cfg = expand_variant(cfg.variant, cfg);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

TrainConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config_file(const std::filesystem::path& path, const TrainConfig& cfg) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("config: cannot open " + tmp.string() + " for writing");
        os << config_to_json(cfg).dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

TrainConfig expand_variant(const std::string& variant, TrainConfig base) {
    TrainConfig cfg = std::move(base);
    cfg.variant = variant;
    cfg.agg.lambda_mode = LambdaMode::Fixed;
    if (variant == "GAN") {
        cfg.ensemble.n = 1;
        cfg.loss_mode = LossMode::Original;
        cfg.agg.kind = AggregationKind::Am;
        cfg.agg.lambda = 0.0;
    } else if (variant == "mod-GAN") {
        cfg.ensemble.n = 1;
        cfg.loss_mode = LossMode::Modified;
        cfg.agg.kind = AggregationKind::Am;
        cfg.agg.lambda = 0.0;
    } else if (variant == "GMAN-0") {
        cfg.loss_mode = LossMode::Original;
        cfg.agg.kind = AggregationKind::Am;
        cfg.agg.lambda = 0.0;
    } else if (variant == "GMAN-max") {
        cfg.loss_mode = LossMode::Original;
        cfg.agg.kind = AggregationKind::Max;
    } else if (variant == "GMAN*" || variant == "GMAN-star") {
        cfg.loss_mode = LossMode::Original;
        cfg.agg.kind = AggregationKind::Am;
        cfg.agg.lambda_mode = LambdaMode::Learned;
    } else if (variant.rfind("GMAN-", 0) == 0) {
        std::string tail = variant.substr(5);
        try {
            std::size_t pos = 0;
            double lambda = std::stod(tail, &pos);
            if (pos != tail.size() || !(lambda >= 0.0)) throw std::invalid_argument(tail);
            cfg.loss_mode = LossMode::Original;
            cfg.agg.kind = AggregationKind::Am;
            cfg.agg.lambda = lambda;
        } catch (const std::exception&) {
            throw ConfigError("unknown variant '" + variant + "'");
        }
    } else {
        throw ConfigError("unknown variant '" + variant +
                          "' (expected GAN, mod-GAN, GMAN-0, GMAN-max, GMAN-<lambda> or GMAN*)");
    }
    return cfg;
}

} // namespace gman
