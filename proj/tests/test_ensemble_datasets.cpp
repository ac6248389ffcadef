#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gman/datasets.hpp"
#include "gman/ensemble.hpp"

using namespace gman;

namespace {

NetworkSpec base_disc() {
    NetworkSpec spec;
    spec.widths = {2, 64, 64, 1};
    return spec;
}

} // namespace

TEST_CASE("build_ensemble") {
    SUBCASE("N=1 keeps the base with dropout at the range low end") {
        EnsembleConfig cfg;
        cfg.n = 1;
        auto slots = build_ensemble(base_disc(), cfg, 7, {});
        REQUIRE(slots.size() == 1);
        CHECK(slots[0].spec.widths == base_disc().widths);
        for (double r : slots[0].spec.dropout) CHECK(r == doctest::Approx(0.3).epsilon(1e-15));
    }
    SUBCASE("N=5 spreads dropout evenly over [0.3, 0.7]") {
        EnsembleConfig cfg;
        cfg.n = 5;
        auto slots = build_ensemble(base_disc(), cfg, 7, {});
        std::vector<double> expect{0.3, 0.4, 0.5, 0.6, 0.7};
        for (std::size_t i = 0; i < 5; ++i) {
            for (double r : slots[i].spec.dropout) {
                CHECK(r == doctest::Approx(expect[i]).epsilon(1e-12));
            }
        }
    }
    SUBCASE("width divisors cycle across slots") {
        EnsembleConfig cfg;
        cfg.n = 2;
        cfg.width_divisors = {1, 2};
        auto slots = build_ensemble(base_disc(), cfg, 7, {});
        CHECK(slots[0].spec.widths == std::vector<std::size_t>{2, 64, 64, 1});
        CHECK(slots[1].spec.widths == std::vector<std::size_t>{2, 32, 32, 1});
    }
    SUBCASE("depth variants remove the last hidden layer") {
        EnsembleConfig cfg;
        cfg.n = 2;
        cfg.depth_variants = {false, true};
        auto slots = build_ensemble(base_disc(), cfg, 7, {});
        CHECK(slots[0].spec.widths.size() == 4);
        CHECK(slots[1].spec.widths == std::vector<std::size_t>{2, 64, 1});
    }
    SUBCASE("width division to zero is rejected") {
        EnsembleConfig cfg;
        cfg.n = 1;
        cfg.width_divisors = {128};
        CHECK_THROWS_WITH_AS(build_ensemble(base_disc(), cfg, 7, {}), doctest::Contains("zero"),
                             std::invalid_argument);
    }
    SUBCASE("deterministic given (base, config, master seed)") {
        EnsembleConfig cfg;
        cfg.n = 3;
        auto a = build_ensemble(base_disc(), cfg, 99, {});
        auto b = build_ensemble(base_disc(), cfg, 99, {});
        for (std::size_t i = 0; i < 3; ++i) {
            REQUIRE(a[i].params.items.size() == b[i].params.items.size());
            for (std::size_t k = 0; k < a[i].params.items.size(); ++k) {
                CHECK(a[i].params.items[k].value.data == b[i].params.items[k].value.data);
            }
        }
    }
    SUBCASE("slots never share parameter storage") {
        EnsembleConfig cfg;
        cfg.n = 2;
        cfg.width_divisors = {1};
        auto slots = build_ensemble(base_disc(), cfg, 7, {});
        std::vector<double> before = slots[1].params.items[0].value.data;
        for (double& v : slots[0].params.items[0].value.data) v += 1000.0;
        CHECK(slots[1].params.items[0].value.data == before);
    }
}

TEST_CASE("split_minibatch") {
    SUBCASE("shared gives every slot the full batch") {
        auto s = split_minibatch(10, 3, SplitMode::Shared);
        REQUIRE(s.size() == 3);
        for (auto slice : s) {
            CHECK(slice.begin == 0);
            CHECK(slice.end == 10);
        }
    }
    SUBCASE("disjoint B=100 n=5 gives five exhaustive blocks of 20") {
        auto s = split_minibatch(100, 5, SplitMode::Disjoint);
        REQUIRE(s.size() == 5);
        std::size_t expect_begin = 0;
        for (auto slice : s) {
            CHECK(slice.begin == expect_begin);
            CHECK(slice.size() == 20);
            expect_begin = slice.end;
        }
        CHECK(expect_begin == 100);
    }
    SUBCASE("disjoint n=1 is the whole batch") {
        auto s = split_minibatch(32, 1, SplitMode::Disjoint);
        REQUIRE(s.size() == 1);
        CHECK(s[0].begin == 0);
        CHECK(s[0].end == 32);
    }
    SUBCASE("indivisible batch is rejected in disjoint mode") {
        CHECK_THROWS_AS(split_minibatch(10, 3, SplitMode::Disjoint), std::invalid_argument);
    }
    SUBCASE("slice_rows materializes a partition that reassembles the batch") {
        Tensor batch = Tensor::zeros({6, 2});
        for (std::size_t i = 0; i < batch.numel(); ++i) batch.data[i] = static_cast<double>(i);
        auto slices = split_minibatch(6, 3, SplitMode::Disjoint);
        std::vector<double> reassembled;
        for (auto slice : slices) {
            Tensor part = slice_rows(batch, slice);
            reassembled.insert(reassembled.end(), part.data.begin(), part.data.end());
        }
        CHECK(reassembled == batch.data);
    }
}

TEST_CASE("mixture construction") {
    SUBCASE("ring2d k=4 r=1 lands on the axes") {
        MixtureSpec spec = ring2d(4, 1.0, 0.1);
        REQUIRE(spec.centers.size() == 4);
        CHECK(spec.centers[0][0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(spec.centers[0][1] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(spec.centers[1][0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(spec.centers[1][1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(spec.centers[2][0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(spec.centers[3][1] == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("ring2d k=8 r=2 adjacent chord length") {
        MixtureSpec spec = ring2d(8, 2.0, 0.02);
        double dx = spec.centers[1][0] - spec.centers[0][0];
        double dy = spec.centers[1][1] - spec.centers[0][1];
        CHECK(std::sqrt(dx * dx + dy * dy) == doctest::Approx(1.5307337294603591).epsilon(1e-12));
    }
    SUBCASE("ring2d k=1 is a single center at (radius, 0)") {
        MixtureSpec spec = ring2d(1, 3.0, 0.1);
        REQUIRE(spec.centers.size() == 1);
        CHECK(spec.centers[0][0] == doctest::Approx(3.0));
    }
    SUBCASE("pointset1d builds one uniform component per point") {
        MixtureSpec spec = pointset1d(default_nine_points(), 0.05);
        REQUIRE(spec.centers.size() == 9);
        for (double w : spec.weights) CHECK(w == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
        CHECK(spec.dim == 1);
    }
    SUBCASE("pointset1d rejects an empty set") {
        CHECK_THROWS_AS(pointset1d({}, 0.1), std::invalid_argument);
    }
}

TEST_CASE("sample_mixture") {
    SUBCASE("n = 0 is rejected") {
        RngStream rng(1);
        CHECK_THROWS_AS(sample_mixture(ring2d(4, 1.0, 0.1), 0, rng), std::invalid_argument);
    }
    SUBCASE("degenerate sigma concentrates on the single center") {
        MixtureSpec spec;
        spec.dim = 1;
        spec.centers = {{2.5}};
        spec.weights = {1.0};
        spec.sigma = 1e-12;
        RngStream rng(2);
        Tensor x = sample_mixture(spec, 100, rng);
        for (double v : x.data) CHECK(v == doctest::Approx(2.5).epsilon(1e-9));
    }
    SUBCASE("zero-weight components are never drawn") {
        MixtureSpec spec;
        spec.dim = 1;
        spec.centers = {{-100.0}, {100.0}};
        spec.weights = {1.0, 0.0};
        spec.sigma = 0.1;
        RngStream rng(3);
        Tensor x = sample_mixture(spec, 500, rng);
        for (double v : x.data) CHECK(v < 0.0);
    }
    SUBCASE("ring of 8 at radius 2: center of mass near the origin") {
        RngStream rng(4);
        Tensor x = sample_mixture(ring2d(8, 2.0, 0.02), 10000, rng);
        double cx = 0.0, cy = 0.0;
        for (std::size_t i = 0; i < 10000; ++i) {
            cx += x.at(i, 0);
            cy += x.at(i, 1);
        }
        cx /= 10000.0;
        cy /= 10000.0;
        CHECK(std::sqrt(cx * cx + cy * cy) < 0.05);
    }
    SUBCASE("pointset empirical mean approaches the center average") {
        MixtureSpec spec = pointset1d(default_nine_points(), 0.05);
        double center_mean = 0.0;
        for (const auto& c : spec.centers) center_mean += c[0];
        center_mean /= 9.0;
        // mixture stddev ~ sqrt(var(centers) + sigma^2) ~ 3.0 for the default set
        RngStream rng(5);
        const std::size_t n = 100000;
        Tensor x = sample_mixture(spec, n, rng);
        double mean = 0.0;
        for (double v : x.data) mean += v;
        mean /= static_cast<double>(n);
        CHECK(std::abs(mean - center_mean) < 4.0 * 3.0 / std::sqrt(static_cast<double>(n)));
    }
    SUBCASE("deterministic per stream") {
        RngStream a(6), b(6);
        Tensor xa = sample_mixture(ring2d(8, 2.0, 0.02), 64, a);
        Tensor xb = sample_mixture(ring2d(8, 2.0, 0.02), 64, b);
        CHECK(xa.data == xb.data);
    }
}

TEST_CASE("idx files") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path();

    SUBCASE("hand-built 2-image 2x2 file round-trips exactly") {
        IdxImageSet set;
        set.count = 2;
        set.rows = 2;
        set.cols = 2;
        set.pixels = {0, 64, 128, 255, 10, 20, 30, 40};
        fs::path path = dir / "gman_idx_test.idx";
        idx_write_images(path, set);
        IdxImageSet loaded = idx_load(path, IdxKind::Images);
        CHECK(loaded.count == 2);
        CHECK(loaded.rows == 2);
        CHECK(loaded.cols == 2);
        CHECK(loaded.pixels == set.pixels);
        fs::remove(path);
    }
    SUBCASE("label magic passed as images is rejected") {
        fs::path path = dir / "gman_idx_labels.idx";
        idx_write_labels(path, {1, 2, 3});
        CHECK_THROWS_WITH_AS(idx_load(path, IdxKind::Images), doctest::Contains("wrong magic"),
                             std::runtime_error);
        CHECK(idx_load_labels(path) == std::vector<std::uint8_t>{1, 2, 3});
        fs::remove(path);
    }
    SUBCASE("truncated payload is rejected with a byte offset") {
        IdxImageSet set;
        set.count = 2;
        set.rows = 2;
        set.cols = 2;
        set.pixels.assign(8, 7);
        fs::path path = dir / "gman_idx_trunc.idx";
        idx_write_images(path, set);
        fs::resize_file(path, fs::file_size(path) - 3);
        CHECK_THROWS_WITH_AS(idx_load(path, IdxKind::Images), doctest::Contains("byte offset"),
                             std::runtime_error);
        fs::remove(path);
    }
    SUBCASE("pixel rescale endpoints") {
        IdxImageSet set;
        set.count = 1;
        set.rows = 1;
        set.cols = 2;
        set.pixels = {0, 255};
        RealImages real = rescale_to_unit(to_real(set));
        CHECK(real.pixels[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(real.pixels[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("downsample") {
    RealImages img;
    img.count = 1;
    img.rows = 2;
    img.cols = 2;
    img.pixels = {0.0, 0.0, 255.0, 255.0};

    SUBCASE("factor 1 is the identity") {
        RealImages out = downsample(img, 1);
        CHECK(out.pixels == img.pixels);
    }
    SUBCASE("2x2 block average") {
        RealImages out = downsample(img, 2);
        REQUIRE(out.pixels.size() == 1);
        CHECK(out.pixels[0] == doctest::Approx(127.5).epsilon(1e-15));
        CHECK(out.rows == 1);
        CHECK(out.cols == 1);
    }
    SUBCASE("constant image stays constant") {
        RealImages flat;
        flat.count = 1;
        flat.rows = 4;
        flat.cols = 4;
        flat.pixels.assign(16, 42.0);
        RealImages out = downsample(flat, 2);
        for (double v : out.pixels) CHECK(v == doctest::Approx(42.0).epsilon(1e-15));
    }
    SUBCASE("non-divisible dimensions are rejected") {
        RealImages odd;
        odd.count = 1;
        odd.rows = 3;
        odd.cols = 2;
        odd.pixels.assign(6, 1.0);
        CHECK_THROWS_AS(downsample(odd, 2), std::invalid_argument);
    }
}
