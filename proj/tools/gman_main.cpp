// gman: multi-adversarial GAN lab CLI.
//
// Subcommands: train, gmam, report, sweep. Exit codes: 0 success,
// 2 configuration error, 3 runtime abort.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "gman/checkpoint.hpp"
#include "gman/config.hpp"
#include "gman/report.hpp"
#include "gman/runio.hpp"

namespace fs = std::filesystem;
using namespace gman;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;

int run_one_training(TrainConfig cfg, const fs::path& out, bool timing) {
    RunLog log = train(cfg);
    fs::create_directories(out);
    RunManifest m = persist_run(log, out, timing);
    if (log.aborted) {
        std::cerr << "training aborted: " << (log.anomalies.empty() ? "?" : log.anomalies.front())
                  << "\npartial logs preserved in " << out << "\n";
        return kExitAbort;
    }
    std::cout << "run " << m.run_id << ": " << log.records.size() << " log rows, "
              << log.total_ms << " ms -> " << out << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& variant, std::int64_t seed, bool timing) {
    TrainConfig cfg;
    try {
        cfg = load_config_file(config_path);
        if (!variant.empty()) cfg = expand_variant(variant, cfg);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return run_one_training(cfg, out_dir, timing);
}

int cmd_gmam(const std::vector<std::string>& run_dirs, std::size_t samples, std::int64_t seed,
             const std::string& out_dir) {
    std::vector<LoadedRun> runs;
    for (const std::string& d : run_dirs) runs.push_back(load_run(d));
    std::uint64_t eval_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 2026;

    if (runs.size() == 2) {
        GmamResult r = gmam(runs[0].system, runs[1].system, samples, eval_seed);
        std::printf("GMAM(%s, %s) = %+.6f\n", runs[0].manifest.run_id.c_str(),
                    runs[1].manifest.run_id.c_str(), r.score);
        std::printf("  F^a(G_b)=%.6f F^a(G_a)=%.6f F^b(G_a)=%.6f F^b(G_b)=%.6f  (n=%zu)\n",
                    r.components.fa_gb, r.components.fa_ga, r.components.fb_ga, r.components.fb_gb,
                    r.components.samples);
        std::printf("  positive favors %s\n", runs[1].manifest.run_id.c_str());
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ostringstream os;
            os << "a,b,score,fa_gb,fa_ga,fb_ga,fb_gb,samples\n"
               << runs[0].manifest.run_id << ',' << runs[1].manifest.run_id << ',' << r.score << ','
               << r.components.fa_gb << ',' << r.components.fa_ga << ',' << r.components.fb_ga
               << ',' << r.components.fb_gb << ',' << r.components.samples << '\n';
            atomic_write_text(fs::path(out_dir) / "gmam.csv", os.str());
        }
        return kExitOk;
    }

    // Tournament: pair csv rows are captured through a second pass below.
    Tournament t = gmam_tournament(runs, samples, eval_seed);
    std::vector<std::string> pair_rows;
    {
        std::map<std::string, std::vector<LoadedRun*>> fam;
        for (LoadedRun& r : runs) fam[r.manifest.variant].push_back(&r);
        for (auto& [name, members] : fam) {
            std::sort(members.begin(), members.end(), [](const LoadedRun* a, const LoadedRun* b) {
                return a->manifest.seed < b->manifest.seed;
            });
        }
        for (std::size_t a = 0; a < t.variants.size(); ++a) {
            for (std::size_t b = a + 1; b < t.variants.size(); ++b) {
                auto& ra = fam[t.variants[a]];
                auto& rb = fam[t.variants[b]];
                std::size_t pairs = std::min(ra.size(), rb.size());
                for (std::size_t p = 0; p < pairs; ++p) {
                    GmamResult r = gmam(ra[p]->system, rb[p]->system, samples,
                                        splitmix64(eval_seed + p));
                    std::ostringstream os;
                    os << t.variants[a] << ',' << t.variants[b] << ',' << ra[p]->manifest.seed
                       << ',' << rb[p]->manifest.seed << ',' << r.score << ',' << r.components.fa_gb
                       << ',' << r.components.fa_ga << ',' << r.components.fb_ga << ','
                       << r.components.fb_gb;
                    pair_rows.push_back(os.str());
                }
            }
        }
    }
    fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(out);
    write_tournament_csv(t, out / "gmam_matrix.csv", out / "gmam_pairs.csv", pair_rows);

    std::printf("%10s  %s\n", "score", "variant");
    std::vector<std::size_t> order(t.variants.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return t.column_scores[a] > t.column_scores[b]; });
    for (std::size_t i : order) {
        std::printf("%+10.4f  %s\n", t.column_scores[i], t.variants[i].c_str());
    }
    std::printf("matrix -> %s\n", (out / "gmam_matrix.csv").string().c_str());
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir,
               std::size_t window, double threshold_frac, std::size_t coverage_samples,
               std::int64_t seed, bool deterministic_plots) {
    std::vector<LoadedRun> runs;
    for (const std::string& d : run_dirs) runs.push_back(load_run(d));
    std::vector<LoadedRun*> ptrs;
    for (LoadedRun& r : runs) ptrs.push_back(&r);
    ReportOptions opts;
    opts.window = window;
    opts.threshold_frac = threshold_frac;
    opts.coverage_samples = coverage_samples;
    opts.deterministic_plots = deterministic_plots;
    if (seed >= 0) opts.eval_seed = static_cast<std::uint64_t>(seed);
    auto summaries = write_report(ptrs, out_dir, opts);
    for (const FamilySummary& s : summaries) {
        std::printf("%s: threshold %.6g, steady-state iterations:", s.family.c_str(), s.threshold);
        for (std::int64_t it : s.steady_iterations) {
            if (it < 0) {
                std::printf(" not-reached");
            } else {
                std::printf(" %lld", static_cast<long long>(it));
            }
        }
        std::printf("\n");
    }
    std::printf("report -> %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, bool timing) {
    nlohmann::json j;
    std::vector<std::string> variants;
    std::vector<std::uint64_t> seeds;
    TrainConfig base;
    try {
        std::ifstream is(config_path);
        if (!is) throw ConfigError("cannot open " + config_path);
        is >> j;
        if (!j.contains("base")) throw ConfigError("sweep config needs a 'base' object");
        base = config_from_json(j.at("base"));
        variants = j.value("variants", std::vector<std::string>{});
        seeds = j.value("seeds", std::vector<std::uint64_t>{});
        if (variants.empty() || seeds.empty()) {
            throw ConfigError("sweep config needs non-empty 'variants' and 'seeds' arrays");
        }
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const std::string& variant : variants) {
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg;
            try {
                cfg = expand_variant(variant, base);
                cfg.seed = seed;
                cfg.validate();
            } catch (const std::exception& e) {
                std::cerr << "config error (" << variant << "): " << e.what() << "\n";
                return kExitConfig;
            }
            fs::path out = fs::path(out_dir) / variant / ("seed_" + std::to_string(seed));
            int rc = run_one_training(cfg, out, timing);
            if (rc != kExitOk) return rc;
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-adversarial GAN laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir, variant;
    std::int64_t seed = -1;
    bool timing = false, deterministic_plots = false;
    std::vector<std::string> run_dirs;
    std::size_t samples = 0, window = 500, coverage_samples = 10000;
    double threshold_frac = 0.1;

    CLI::App* train_cmd = app.add_subcommand("train", "run one training configuration");
    train_cmd->add_option("--config", config_path, "configuration file")->required();
    train_cmd->add_option("--out", out_dir, "run output directory")->required();
    train_cmd->add_option("--variant", variant, "override the config's variant name");
    train_cmd->add_option("--seed", seed, "override the config's master seed");
    train_cmd->add_flag("--timing", timing, "write measured ms into runlog.csv (breaks byte-reproducibility)");

    CLI::App* gmam_cmd = app.add_subcommand("gmam", "pairwise metric between trained runs");
    gmam_cmd->add_option("rundirs", run_dirs, "two run directories (or more for a tournament)")
        ->required()
        ->expected(2, -1);
    gmam_cmd->add_option("--samples", samples, "evaluation sample count (0 = 10x batch size)");
    gmam_cmd->add_option("--seed", seed, "evaluation seed");
    gmam_cmd->add_option("--out", out_dir, "directory for CSV outputs");

    CLI::App* report_cmd = app.add_subcommand("report", "convergence/coverage report over runs");
    report_cmd->add_option("rundirs", run_dirs, "run directories")->required()->expected(1, -1);
    report_cmd->add_option("--out", out_dir, "report output directory")->required();
    report_cmd->add_option("--window", window, "sliding stdev window (default 500)");
    report_cmd->add_option("--threshold-frac", threshold_frac,
                           "steady-state threshold as a fraction of the first-window stdev");
    report_cmd->add_option("--coverage-samples", coverage_samples, "samples for mode coverage");
    report_cmd->add_option("--seed", seed, "evaluation seed");
    report_cmd->add_flag("--deterministic-plots", deterministic_plots,
                         "suppress timestamps embedded in plots");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "variants x seeds cartesian product");
    sweep_cmd->add_option("--config", config_path, "sweep configuration file")->required();
    sweep_cmd->add_option("--out", out_dir, "sweep output directory")->required();
    sweep_cmd->add_flag("--timing", timing, "write measured ms into runlog.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir, variant, seed, timing);
        if (gmam_cmd->parsed()) return cmd_gmam(run_dirs, samples, seed, out_dir);
        if (report_cmd->parsed()) {
            return cmd_report(run_dirs, out_dir, window, threshold_frac, coverage_samples, seed,
                              deterministic_plots);
        }
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, out_dir, timing);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    }
    return kExitOk;
}
