#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gman/config.hpp"
#include "gman/report.hpp"
#include "gman/runio.hpp"

using namespace gman;
namespace fs = std::filesystem;

namespace {

TrainConfig small_ring(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.variant = "GMAN-0";
    cfg.latent_dim = 4;
    cfg.gen_hidden = {8};
    cfg.disc_hidden = {8};
    cfg.ensemble.n = 2;
    cfg.batch_size = 20;
    cfg.iterations = 12;
    cfg.seed = seed;
    return cfg;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("config round-trip is the identity") {
    TrainConfig cfg = small_ring(5);
    cfg.agg.lambda_mode = LambdaMode::Learned;
    cfg.agg.c = 0.002;
    cfg.variant = "GMAN*";
    TrainConfig back = config_from_json(config_to_json(cfg));
    CHECK(back == cfg);
    TrainConfig back2 = config_from_json(config_to_json(back));
    CHECK(back2 == back);
}

TEST_CASE("variant expansion follows the experiment roster") {
    TrainConfig base = small_ring(1);
    base.ensemble.n = 5;
    base.batch_size = 100;

    TrainConfig gan = expand_variant("GAN", base);
    CHECK(gan.ensemble.n == 1);
    CHECK(gan.loss_mode == LossMode::Original);
    CHECK(gan.agg.kind == AggregationKind::Am);
    CHECK(gan.agg.lambda == 0.0);

    TrainConfig mod = expand_variant("mod-GAN", base);
    CHECK(mod.ensemble.n == 1);
    CHECK(mod.loss_mode == LossMode::Modified);

    TrainConfig g0 = expand_variant("GMAN-0", base);
    CHECK(g0.ensemble.n == 5);
    CHECK(g0.agg.kind == AggregationKind::Am);
    CHECK(g0.agg.lambda == 0.0);
    CHECK(g0.loss_mode == LossMode::Original);

    TrainConfig g1 = expand_variant("GMAN-1", base);
    CHECK(g1.agg.lambda == 1.0);

    TrainConfig gmax = expand_variant("GMAN-max", base);
    CHECK(gmax.agg.kind == AggregationKind::Max);

    TrainConfig star = expand_variant("GMAN*", base);
    CHECK(star.agg.lambda_mode == LambdaMode::Learned);
    CHECK(star.agg.c == doctest::Approx(0.001));
    CHECK(star.agg.lambda0 == doctest::Approx(-2.0));

    CHECK_THROWS_AS(expand_variant("GMAN-bogus", base), ConfigError);
    CHECK_THROWS_AS(expand_variant("DCGAN", base), ConfigError);
}

TEST_CASE("config parse failures carry field-level diagnostics") {
    CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json::object()),
                         doctest::Contains("dataset"), ConfigError);
    nlohmann::json j;
    j["dataset"] = {{"kind", "nonsense"}};
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("dataset.kind"), ConfigError);
    nlohmann::json j2;
    j2["dataset"] = {{"kind", "ring2d"}};
    j2["aggregation"] = {{"kind", "median"}};
    CHECK_THROWS_WITH_AS(config_from_json(j2), doctest::Contains("aggregation.kind"), ConfigError);
    nlohmann::json j3;
    j3["dataset"] = {{"kind", "ring2d"}};
    j3["batch_size"] = 10;
    j3["ensemble"] = {{"n", 3}};
    CHECK_THROWS_WITH_AS(config_from_json(j3), doctest::Contains("not divisible"), ConfigError);
}

TEST_CASE("persist and reload a run directory") {
    TempDir dir("gman_runio_test");
    TrainConfig cfg = small_ring(21);
    RunLog log = train(cfg);
    RunManifest m = persist_run(log, dir.path);
    CHECK(m.run_id == "GMAN-0-s21");
    for (const auto& [name, rel] : m.artifacts) CHECK(fs::exists(dir.path / rel));

    LoadedRun run = load_run(dir.path);
    CHECK(run.system.config == cfg);
    REQUIRE(run.records.size() == log.records.size());
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        CHECK(run.records[i].iter == log.records[i].iter);
        CHECK(run.records[i].f == log.records[i].f); // %.17g survives the round trip
        CHECK(run.records[i].v == log.records[i].v);
    }
    // checkpointed parameters load bit-for-bit
    for (std::size_t i = 0; i < log.generator.items.size(); ++i) {
        CHECK(run.system.generator.items[i].value.data == log.generator.items[i].value.data);
    }
    REQUIRE(run.system.discriminators.size() == 2);
    CHECK(run.system.discriminators[1].spec == log.slots[1].spec);
}

TEST_CASE("runlog csv is byte-identical across two identical runs") {
    TempDir dir("gman_repro_test");
    TrainConfig cfg = small_ring(33);
    persist_run(train(cfg), dir.path / "a");
    persist_run(train(cfg), dir.path / "b");
    CHECK(slurp(dir.path / "a/runlog.csv") == slurp(dir.path / "b/runlog.csv"));
    CHECK(slurp(dir.path / "a/config.json") == slurp(dir.path / "b/config.json"));
    CHECK(slurp(dir.path / "a/checkpoints/generator.gmanckpt") ==
          slurp(dir.path / "b/checkpoints/generator.gmanckpt"));
}

TEST_CASE("lambda column in the csv") {
    TempDir dir("gman_lambda_csv");
    SUBCASE("learned mode logs softplus of the raw parameter") {
        TrainConfig cfg = small_ring(3);
        cfg.variant = "GMAN*";
        cfg.agg.lambda_mode = LambdaMode::Learned;
        RunLog log = train(cfg);
        persist_run(log, dir.path);
        LoadedRun run = load_run(dir.path);
        for (std::size_t i = 0; i < run.records.size(); ++i) {
            REQUIRE(run.records[i].lambda.has_value());
            CHECK(*run.records[i].lambda == *log.records[i].lambda);
        }
    }
    SUBCASE("max kind logs inf") {
        TrainConfig cfg = small_ring(3);
        cfg.variant = "GMAN-max";
        cfg.agg.kind = AggregationKind::Max;
        persist_run(train(cfg), dir.path);
        std::string csv = slurp(dir.path / "runlog.csv");
        CHECK(csv.find(",inf,") != std::string::npos);
    }
}

TEST_CASE("aborted runs persist partial logs and the anomaly") {
    TempDir dir("gman_abort_test");
    TrainConfig cfg = small_ring(3);
    RunLog log = train(cfg);
    log.aborted = true;
    log.anomalies.push_back("iteration 7: synthetic test anomaly");
    RunManifest m = persist_run(log, dir.path);
    CHECK(m.aborted);
    RunManifest back = read_manifest(dir.path / "manifest.json");
    CHECK(back.aborted);
    REQUIRE(back.anomalies.size() == 1);
    CHECK(back.anomalies[0] == "iteration 7: synthetic test anomaly");
}

TEST_CASE("report over two families") {
    TempDir dir("gman_report_test");
    TrainConfig a = small_ring(1);
    TrainConfig b = small_ring(2);
    TrainConfig c = expand_variant("GAN", small_ring(1));
    persist_run(train(a), dir.path / "a");
    persist_run(train(b), dir.path / "b");
    persist_run(train(c), dir.path / "c");

    LoadedRun ra = load_run(dir.path / "a");
    LoadedRun rb = load_run(dir.path / "b");
    LoadedRun rc = load_run(dir.path / "c");
    ReportOptions opts;
    opts.window = 4;
    opts.coverage_samples = 200;
    opts.deterministic_plots = true;
    std::vector<LoadedRun*> runs{&ra, &rb, &rc};
    auto summaries = write_report(runs, dir.path / "report", opts);

    CHECK(fs::exists(dir.path / "report/f_curves.csv"));
    CHECK(fs::exists(dir.path / "report/sliding_stdev.csv"));
    CHECK(fs::exists(dir.path / "report/steady_state.csv"));
    CHECK(fs::exists(dir.path / "report/mode_coverage.csv"));
    CHECK(fs::exists(dir.path / "report/f_curves.svg"));
    REQUIRE(summaries.size() == 2); // GAN and GMAN-0 families
    for (const auto& s : summaries) CHECK(s.threshold > 0.0);

    SUBCASE("deterministic plots are byte-identical across invocations") {
        auto first = slurp(dir.path / "report/f_curves.svg");
        write_report(runs, dir.path / "report2", opts);
        CHECK(slurp(dir.path / "report2/f_curves.svg") == first);
    }
    SUBCASE("mismatched iteration grids are rejected") {
        TrainConfig shorter = small_ring(9);
        shorter.iterations = 5;
        persist_run(train(shorter), dir.path / "short");
        LoadedRun rs = load_run(dir.path / "short");
        std::vector<LoadedRun*> bad{&ra, &rs};
        CHECK_THROWS_WITH_AS(write_report(bad, dir.path / "report3", opts),
                             doctest::Contains("mismatched iteration grids"),
                             std::invalid_argument);
    }
}

TEST_CASE("gmam tournament matrix is antisymmetric with summed column scores") {
    TempDir dir("gman_tournament_test");
    std::vector<LoadedRun> runs;
    for (std::uint64_t seed : {1, 2}) {
        for (const char* variant : {"GMAN-0", "mod-GAN"}) {
            TrainConfig cfg = expand_variant(variant, small_ring(seed));
            cfg.iterations = 8;
            fs::path out = dir.path / (std::string(variant) + "-" + std::to_string(seed));
            persist_run(train(cfg), out);
            runs.push_back(load_run(out));
        }
    }
    Tournament t = gmam_tournament(runs, 50, 4242);
    REQUIRE(t.variants.size() == 2);
    CHECK(t.cells[0][1].mean == doctest::Approx(-t.cells[1][0].mean).epsilon(1e-12));
    CHECK(t.cells[0][1].pairs == 2);
    CHECK(t.column_scores[0] == doctest::Approx(t.cells[1][0].mean));
    write_tournament_csv(t, dir.path / "matrix.csv", dir.path / "pairs.csv", {});
    std::string csv = slurp(dir.path / "matrix.csv");
    CHECK(csv.find("score,variant") == 0);
}
