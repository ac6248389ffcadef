#include <doctest.h>

#include <cmath>

#include "gman/evaluation.hpp"

using namespace gman;

namespace {

TrainConfig eval_config(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.dataset.kind = DatasetKind::Ring2d;
    cfg.dataset.model_scale = 2.5;
    cfg.latent_dim = 4;
    cfg.gen_hidden = {8};
    cfg.disc_hidden = {8};
    cfg.ensemble.n = 2;
    cfg.batch_size = 20;
    cfg.iterations = 8;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("gmam score from components") {
    SUBCASE("hand fixture") {
        double s = gmam_score_from_components(-0.25, -0.5, -1.0, -0.5);
        CHECK(s == doctest::Approx(std::log(0.25)).epsilon(1e-12));
        CHECK(s == doctest::Approx(-1.3862943611198906).epsilon(1e-12));
    }
    SUBCASE("swapping roles negates the score") {
        double ab = gmam_score_from_components(-0.25, -0.5, -1.0, -0.5);
        double ba = gmam_score_from_components(-1.0, -0.5, -0.25, -0.5);
        CHECK(std::abs(ab + ba) < 1e-12);
    }
    SUBCASE("nonnegative aggregates are rejected") {
        CHECK_THROWS_AS(gmam_score_from_components(0.0, -0.5, -1.0, -0.5), std::invalid_argument);
        CHECK_THROWS_AS(gmam_score_from_components(-0.25, -0.5, 0.1, -0.5), std::invalid_argument);
    }
}

TEST_CASE("gmam over trained systems") {
    RunLog log_a = train(eval_config(1));
    RunLog log_b = train(eval_config(2));
    TrainedSystem a = TrainedSystem::from_runlog(log_a);
    TrainedSystem b = TrainedSystem::from_runlog(log_b);

    SUBCASE("self-comparison scores exactly zero") {
        TrainedSystem a2 = TrainedSystem::from_runlog(log_a);
        GmamResult r = gmam(a, a2, 100, 99);
        CHECK(r.score == 0.0);
        CHECK(r.components.fa_gb == r.components.fa_ga);
    }
    SUBCASE("antisymmetry from shared component evaluations") {
        GmamResult ab = gmam(a, b, 100, 99);
        double ba = gmam_score_from_components(ab.components.fb_ga, ab.components.fb_gb,
                                               ab.components.fa_gb, ab.components.fa_ga);
        CHECK(std::abs(ab.score + ba) < 1e-12);
        for (double f : {ab.components.fa_gb, ab.components.fa_ga, ab.components.fb_ga,
                         ab.components.fb_gb}) {
            CHECK(f < 0.0);
        }
    }
    SUBCASE("component evaluation order does not matter") {
        GmamResult r1 = gmam(a, b, 100, 99);
        GmamResult r2 = gmam(a, b, 100, 99);
        CHECK(r1.score == r2.score);
    }
    SUBCASE("defaults to 10x the training batch size") {
        GmamResult r = gmam(a, b, 0, 99);
        CHECK(r.components.samples == 10 * eval_config(1).batch_size);
    }
    SUBCASE("mismatched dataset configurations are rejected") {
        TrainConfig other = eval_config(3);
        other.dataset.ring_radius = 1.0;
        RunLog log_c = train(other);
        TrainedSystem c = TrainedSystem::from_runlog(log_c);
        CHECK_THROWS_AS(gmam(a, c, 50, 99), std::invalid_argument);
    }
    SUBCASE("learned-mode lambda comes from the checkpointed raw parameter") {
        TrainConfig star = eval_config(4);
        star.agg.lambda_mode = LambdaMode::Learned;
        RunLog log_s = train(star);
        TrainedSystem s = TrainedSystem::from_runlog(log_s);
        CHECK(s.effective_lambda() ==
              doctest::Approx(lambda_reparam(log_s.generator.get("agg.Lambda").data[0]))
                  .epsilon(1e-15));
        GmamResult r = gmam(s, b, 60, 7);
        CHECK(std::isfinite(r.score));
    }
}

TEST_CASE("sliding stdev") {
    SUBCASE("constant series gives zeros") {
        std::vector<double> s(10, 3.5);
        for (double v : sliding_stdev(s, 4)) CHECK(v == 0.0);
    }
    SUBCASE("alternating +-1 with window 4 gives all ones") {
        std::vector<double> s{1, -1, 1, -1, 1, -1, 1, -1};
        auto out = sliding_stdev(s, 4);
        REQUIRE(out.size() == 5);
        for (double v : out) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("series of exactly window length yields one value") {
        std::vector<double> s{1.0, 2.0, 3.0};
        CHECK(sliding_stdev(s, 3).size() == 1);
    }
    SUBCASE("window larger than the series is rejected") {
        std::vector<double> s{1.0, 2.0};
        CHECK_THROWS_AS(sliding_stdev(s, 3), std::invalid_argument);
        CHECK_THROWS_AS(sliding_stdev(s, 1), std::invalid_argument);
    }
    SUBCASE("output is nonnegative and zero only for constant windows") {
        std::vector<double> s{1.0, 1.0, 1.0, 2.0, 2.0, 2.0};
        auto out = sliding_stdev(s, 3);
        CHECK(out[0] == 0.0);
        CHECK(out[1] > 0.0);
        CHECK(out[2] > 0.0);
        CHECK(out[3] == 0.0);
    }
}

TEST_CASE("steady state detection") {
    SUBCASE("below threshold everywhere: the first window") {
        std::vector<double> s{0.01, 0.02, 0.01};
        CHECK(steady_state_index(s, 0.1) == 0);
    }
    SUBCASE("never below: not reached") {
        std::vector<double> s{0.5, 0.4, 0.6};
        CHECK(!steady_state_index(s, 0.1).has_value());
    }
    SUBCASE("a dip that does not persist is skipped") {
        std::vector<double> s{0.5, 0.3, 0.09, 0.2, 0.08, 0.07, 0.05, 0.06, 0.04};
        CHECK(steady_state_index(s, 0.1) == 4);
    }
    SUBCASE("threshold must be positive") {
        std::vector<double> s{0.1};
        CHECK_THROWS_AS(steady_state_index(s, 0.0), std::invalid_argument);
    }
    SUBCASE("convergence report maps indices onto the iteration grid") {
        std::vector<double> f{5, 5, 5, 5, 1, 1, 1, 1, 1, 1};
        std::vector<std::int64_t> iters{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        ConvergenceReport rep = convergence_report(f, iters, 4, 0.1);
        REQUIRE(rep.steady_index.has_value());
        // windows starting at index 4 cover the constant tail
        CHECK(*rep.steady_index == 4);
        CHECK(*rep.steady_iteration == 8);
        CHECK(rep.steady_iteration >= static_cast<std::int64_t>(rep.window));
    }
}

TEST_CASE("cross-run variance") {
    SUBCASE("identical runs have zero variance") {
        std::vector<std::vector<double>> runs{{-1.0, -2.0}, {-1.0, -2.0}};
        CHECK(run_variance(runs, 0) == 0.0);
        CHECK(run_variance(runs, 1) == 0.0);
    }
    SUBCASE("hand-computed sample variance") {
        std::vector<std::vector<double>> runs{{-1.0}, {-1.2}};
        CHECK(run_variance(runs, 0) == doctest::Approx(0.02).epsilon(1e-12));
    }
    SUBCASE("invariant under run ordering") {
        std::vector<std::vector<double>> runs{{-1.0}, {-1.2}, {-0.7}};
        std::vector<std::vector<double>> perm{{-0.7}, {-1.0}, {-1.2}};
        CHECK(run_variance(runs, 0) == doctest::Approx(run_variance(perm, 0)).epsilon(1e-15));
    }
    SUBCASE("fewer than two runs is rejected") {
        std::vector<std::vector<double>> runs{{-1.0}};
        CHECK_THROWS_AS(run_variance(runs, 0), std::invalid_argument);
    }
}

TEST_CASE("mode coverage") {
    MixtureSpec ring = ring2d(8, 2.0, 0.02);

    SUBCASE("all samples at one center covers exactly that mode") {
        Tensor samples = Tensor::zeros({50, 2});
        for (std::size_t i = 0; i < 50; ++i) {
            samples.at(i, 0) = ring.centers[3][0];
            samples.at(i, 1) = ring.centers[3][1];
        }
        ModeCoverage cov = mode_coverage(samples, ring, 3.0, 20);
        CHECK(cov.covered == 1);
        CHECK(cov.high_quality_fraction == doctest::Approx(1.0));
    }
    SUBCASE("min_count samples at every center covers all eight") {
        Tensor samples = Tensor::zeros({8 * 20, 2});
        for (std::size_t m = 0; m < 8; ++m) {
            for (std::size_t k = 0; k < 20; ++k) {
                samples.at(m * 20 + k, 0) = ring.centers[m][0];
                samples.at(m * 20 + k, 1) = ring.centers[m][1];
            }
        }
        ModeCoverage cov = mode_coverage(samples, ring, 3.0, 20);
        CHECK(cov.covered == 8);
        CHECK(cov.high_quality_fraction == doctest::Approx(1.0));
    }
    SUBCASE("samples from the true mixture cover all modes") {
        RngStream rng(77);
        Tensor samples = sample_mixture(ring, 10000, rng);
        ModeCoverage cov = mode_coverage(samples, ring, 3.0, 20);
        CHECK(cov.covered == 8);
        CHECK(cov.high_quality_fraction > 0.95);
    }
    SUBCASE("coverage is invariant under component relabeling") {
        RngStream rng(78);
        Tensor samples = sample_mixture(ring, 2000, rng);
        MixtureSpec relabeled = ring;
        std::reverse(relabeled.centers.begin(), relabeled.centers.end());
        ModeCoverage a = mode_coverage(samples, ring, 3.0, 20);
        ModeCoverage b = mode_coverage(samples, relabeled, 3.0, 20);
        CHECK(a.covered == b.covered);
        CHECK(a.high_quality_fraction == doctest::Approx(b.high_quality_fraction));
    }
    SUBCASE("empty sample set is rejected") {
        CHECK_THROWS_AS(mode_coverage(Tensor::zeros({0, 2}), ring, 3.0, 20),
                        std::invalid_argument);
    }
    SUBCASE("dimension mismatch is rejected") {
        CHECK_THROWS_AS(mode_coverage(Tensor::zeros({5, 1}), ring, 3.0, 20),
                        std::invalid_argument);
    }
}
