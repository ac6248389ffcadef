#include "gman/runio.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "gman/checkpoint.hpp"
#include "gman/config.hpp"

namespace gman {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Lambda column: learned mode logs softplus(Lambda); fixed soft kinds log the
// configured constant; max has no temperature and logs inf.
double lambda_column(const TrainConfig& cfg, const LogRecord& rec) {
    if (rec.lambda) return *rec.lambda;
    if (cfg.agg.kind == AggregationKind::Max) return std::numeric_limits<double>::infinity();
    return cfg.agg.lambda;
}

std::string disc_ckpt_name(std::size_t i) {
    return "checkpoints/disc_" + std::to_string(i) + ".gmanckpt";
}

} // namespace

std::string iso8601_utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void atomic_write_text(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os << text;
        if (!os) throw std::runtime_error("write failure on " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_runlog_csv(const fs::path& path, const TrainConfig& cfg,
                      const std::vector<LogRecord>& records, bool include_timing) {
    std::ostringstream os;
    std::size_t n = cfg.ensemble.n;
    os << "iter,F,lambda";
    for (std::size_t i = 1; i <= n; ++i) os << ",V_" << i;
    os << ",ms\n";
    for (const LogRecord& rec : records) {
        os << rec.iter << ',' << fmt_double(rec.f) << ',' << fmt_double(lambda_column(cfg, rec));
        for (double v : rec.v) os << ',' << fmt_double(v);
        os << ',' << (include_timing ? rec.ms : 0) << '\n';
    }
    atomic_write_text(path, os.str());
}

std::vector<LogRecord> read_runlog_csv(const fs::path& path, const TrainConfig& cfg) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("runlog: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("runlog: empty file " + path.string());
    std::size_t cols = 1;
    for (char c : line) cols += c == ',' ? 1 : 0;
    if (cols < 5) throw std::runtime_error("runlog: malformed header in " + path.string());
    std::size_t n = cols - 4; // iter, F, lambda, V_1..V_N, ms

    std::vector<LogRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        LogRecord rec;
        std::stringstream ss(line);
        std::string cell;
        auto next = [&]() {
            if (!std::getline(ss, cell, ',')) {
                throw std::runtime_error("runlog: truncated row in " + path.string());
            }
            return cell;
        };
        rec.iter = std::stoll(next());
        rec.f = std::stod(next());
        double lam = std::stod(next());
        if (cfg.agg.lambda_mode == LambdaMode::Learned) rec.lambda = lam;
        rec.v.resize(n);
        for (std::size_t i = 0; i < n; ++i) rec.v[i] = std::stod(next());
        rec.ms = std::stoll(next());
        out.push_back(std::move(rec));
    }
    return out;
}

RunManifest persist_run(const RunLog& log, const fs::path& dir, bool include_timing) {
    RunManifest m;
    m.started_at = iso8601_utc_now();
    fs::create_directories(dir / "checkpoints");

    write_runlog_csv(dir / "runlog.csv", log.config, log.records, include_timing);
    m.artifacts.emplace_back("runlog", "runlog.csv");

    save_config_file(dir / "config.json", log.config);
    m.artifacts.emplace_back("config", "config.json");

    save_checkpoint(dir / "checkpoints/generator.gmanckpt", log.generator);
    m.artifacts.emplace_back("generator", "checkpoints/generator.gmanckpt");
    for (std::size_t i = 0; i < log.slots.size(); ++i) {
        save_checkpoint(dir / disc_ckpt_name(i), log.slots[i].params);
        m.artifacts.emplace_back("disc_" + std::to_string(i), disc_ckpt_name(i));
    }

    m.variant = log.config.variant.empty() ? "unnamed" : log.config.variant;
    m.seed = log.config.seed;
    m.run_id = m.variant + "-s" + std::to_string(log.config.seed);
    m.total_ms = log.total_ms;
    m.aborted = log.aborted;
    m.anomalies = log.anomalies;
    m.finished_at = iso8601_utc_now();

    for (const auto& [name, rel] : m.artifacts) {
        if (!fs::exists(dir / rel)) {
            throw std::runtime_error("manifest: artifact '" + name + "' missing at " +
                                     (dir / rel).string());
        }
    }

    json j;
    j["run_id"] = m.run_id;
    j["variant"] = m.variant;
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["total_ms"] = m.total_ms;
    j["aborted"] = m.aborted;
    j["anomalies"] = m.anomalies;
    json arts = json::object();
    for (const auto& [name, rel] : m.artifacts) arts[name] = rel;
    j["artifacts"] = arts;
    atomic_write_text(dir / "manifest.json", j.dump(2) + "\n");
    return m;
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("manifest: cannot open " + path.string());
    json j;
    is >> j;
    RunManifest m;
    m.run_id = j.value("run_id", "");
    m.variant = j.value("variant", "");
    m.seed = j.value("seed", std::uint64_t{0});
    m.tool_version = j.value("tool_version", "");
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.total_ms = j.value("total_ms", std::int64_t{0});
    m.aborted = j.value("aborted", false);
    m.anomalies = j.value("anomalies", std::vector<std::string>{});
    if (j.contains("artifacts")) {
        for (auto& [k, v] : j.at("artifacts").items()) {
            m.artifacts.emplace_back(k, v.get<std::string>());
        }
    }
    return m;
}

LoadedRun load_run(const fs::path& dir) {
    LoadedRun run;
    run.dir = dir;
    run.manifest = read_manifest(dir / "manifest.json");
    run.system.config = load_config_file(dir / "config.json");
    run.records = read_runlog_csv(dir / "runlog.csv", run.system.config);

    run.system.generator = load_checkpoint(dir / "checkpoints/generator.gmanckpt");
    for (std::size_t i = 0; i < run.system.config.ensemble.n; ++i) {
        EvalDiscriminator d;
        d.params = load_checkpoint(dir / disc_ckpt_name(i));
        run.system.discriminators.push_back(std::move(d));
    }

    // Rebuild the specs the checkpoints were trained under. The generator's
    // output width pins the data dimension without touching the dataset.
    const TrainConfig& cfg = run.system.config;
    std::string last_w = "L" + std::to_string(cfg.gen_hidden.size()) + ".W";
    std::size_t data_dim = run.system.generator.get(last_w).shape[1];
    run.system.gen_spec = generator_spec_for(cfg, data_dim);
    NetworkSpec base = discriminator_base_for(cfg, data_dim);
    for (std::size_t i = 0; i < run.system.discriminators.size(); ++i) {
        run.system.discriminators[i].spec = derive_slot_spec(base, cfg.ensemble, i);
    }
    return run;
}

} // namespace gman
