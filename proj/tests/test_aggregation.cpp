#include <doctest.h>

#include <cmath>

#include "gman/aggregation.hpp"
#include "gman/rng.hpp"

using namespace gman;

namespace {

double fd_wrt(std::span<const double> v, AggregationKind kind, double lambda, std::size_t i,
              double h = 1e-6) {
    std::vector<double> a(v.begin(), v.end()), b(v.begin(), v.end());
    a[i] += h;
    b[i] -= h;
    return (aggregate_value(a, kind, lambda) - aggregate_value(b, kind, lambda)) / (2.0 * h);
}

} // namespace

TEST_CASE("softmax weights") {
    SUBCASE("lambda = 0 gives the exact uniform vector") {
        std::vector<double> v{-3.0, -0.5, -7.0, -1.25};
        auto w = softmax_weights(v, 0.0);
        for (double wi : w) CHECK(wi == 0.25);
    }
    SUBCASE("hand-evaluated weights at lambda = 1") {
        auto w = softmax_weights(std::vector<double>{-1.0, -2.0}, 1.0);
        CHECK(w[0] == doctest::Approx(0.7310585786300049).epsilon(1e-12));
        CHECK(w[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
    }
    SUBCASE("large lambda saturates onto the argmax") {
        auto w = softmax_weights(std::vector<double>{-1.0, -2.0}, 50.0);
        CHECK(std::abs(w[0] - 1.0) < 1e-12);
        CHECK(std::abs(w[1]) < 1e-12);
    }
    SUBCASE("weights form a simplex") {
        RngStream rng(31);
        for (int t = 0; t < 200; ++t) {
            std::size_t n = 1 + rng.next_u64() % 8;
            std::vector<double> v(n);
            for (double& x : v) x = -rng.uniform(0.01, 10.0);
            auto w = softmax_weights(v, rng.uniform(0.0, 20.0));
            double sum = 0.0;
            for (double wi : w) {
                CHECK(wi >= 0.0);
                sum += wi;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
    SUBCASE("nonnegative utilities and negative lambda are rejected") {
        CHECK_THROWS_AS(softmax_weights(std::vector<double>{-1.0, 0.0}, 1.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(softmax_weights(std::vector<double>{-1.0, -2.0}, -0.5),
                        std::invalid_argument);
    }
}

TEST_CASE("lambda reparameterization is softplus") {
    CHECK(lambda_reparam(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(lambda_reparam(5.0) == doctest::Approx(5.006715348489118).epsilon(1e-12));
    CHECK(lambda_reparam(-40.0) > 0.0);
    CHECK(lambda_reparam(-40.0) < 1e-15);
    CHECK(lambda_reparam(1000.0) == doctest::Approx(1000.0).epsilon(1e-12));
    SUBCASE("strictly increasing with sigmoid slope") {
        Graph g;
        NodeId raw = g.leaf(Tensor::scalar(1.3));
        NodeId lam = g.softplus(raw);
        g.backward(lam);
        CHECK(g.grad(raw).data[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.3))).epsilon(1e-12));
    }
}

TEST_CASE("aggregate closed forms on the (-1,-2) fixture") {
    std::vector<double> v{-1.0, -2.0};
    CHECK(aggregate_value(v, AggregationKind::Am, 0.0) == doctest::Approx(-1.5).epsilon(1e-12));
    CHECK(aggregate_value(v, AggregationKind::Gm, 0.0) ==
          doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
    CHECK(aggregate_value(v, AggregationKind::Hm, 0.0) ==
          doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(aggregate_value(v, AggregationKind::Max, 0.0) == -1.0);

    SUBCASE("hand oracle at lambda = 1") {
        CHECK(aggregate_value(v, AggregationKind::Am, 1.0) ==
              doctest::Approx(-1.2689414213699952).epsilon(1e-12));
        CHECK(aggregate_value(v, AggregationKind::Gm, 1.0) ==
              doctest::Approx(-1.204923389759439).epsilon(1e-12));
        CHECK(aggregate_value(v, AggregationKind::Hm, 1.0) ==
              doctest::Approx(-1.1553624034969636).epsilon(1e-12));
    }
    SUBCASE("lambda = 100 collapses every soft kind onto the max") {
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm}) {
            CHECK(std::abs(aggregate_value(v, kind, 100.0) - (-1.0)) < 1e-3);
        }
    }
}

TEST_CASE("aggregate degenerate cases") {
    SUBCASE("constant utilities return the constant for every kind and lambda") {
        std::vector<double> v(5, -2.5);
        for (AggregationKind kind : {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm,
                                     AggregationKind::Max}) {
            for (double lambda : {0.0, 1.0, 10.0}) {
                CHECK(aggregate_value(v, kind, lambda) == doctest::Approx(-2.5).epsilon(1e-12));
            }
        }
    }
    SUBCASE("single element returns exactly that element for any soft kind and lambda") {
        std::vector<double> v{-0.8125};
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm}) {
            for (double lambda : {0.0, 3.0, 77.0}) {
                CHECK(aggregate_value(v, kind, lambda) == -0.8125);
            }
        }
        Graph g;
        NodeId v1 = g.leaf(Tensor::scalar(-0.8125));
        std::vector<NodeId> vs{v1};
        CHECK(aggregate_node(g, vs, AggregationKind::Gm, LambdaInput::fixed(2.0)).f == v1);
    }
    SUBCASE("soft kinds reject nonnegative utilities") {
        CHECK_THROWS_AS(aggregate_value(std::vector<double>{-1.0, 0.5}, AggregationKind::Gm, 1.0),
                        std::invalid_argument);
    }
    SUBCASE("max accepts any reals and routes the subgradient to the first argmax") {
        Graph g;
        std::vector<NodeId> vs{g.leaf(Tensor::scalar(-2.0)), g.leaf(Tensor::scalar(-1.0)),
                               g.leaf(Tensor::scalar(-1.0))};
        AggregateNodes agg = aggregate_node(g, vs, AggregationKind::Max, LambdaInput::fixed(0.0));
        CHECK(g.value(agg.f).data[0] == -1.0);
        g.backward(agg.f);
        CHECK(g.grad(vs[0]).data[0] == 0.0);
        CHECK(g.grad(vs[1]).data[0] == 1.0); // first of the tied pair
        CHECK(g.grad(vs[2]).data[0] == 0.0);
    }
}

TEST_CASE("aggregate node values match the plain evaluation") {
    RngStream rng(37);
    for (int t = 0; t < 100; ++t) {
        std::size_t n = 2 + rng.next_u64() % 6;
        std::vector<double> v(n);
        for (double& x : v) x = -rng.uniform(0.05, 6.0);
        double lambda = rng.uniform(0.0, 8.0);
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm, AggregationKind::Max}) {
            Graph g;
            std::vector<NodeId> vs;
            for (double x : v) vs.push_back(g.leaf(Tensor::scalar(x)));
            AggregateNodes agg = aggregate_node(g, vs, kind, LambdaInput::fixed(lambda));
            CHECK(g.value(agg.f).data[0] ==
                  doctest::Approx(aggregate_value(v, kind, lambda)).epsilon(1e-12));
        }
    }
}

TEST_CASE("aggregate gradients match finite differences within 1e-6") {
    RngStream rng(41);
    for (int t = 0; t < 60; ++t) {
        std::size_t n = 2 + rng.next_u64() % 5;
        std::vector<double> v(n);
        for (double& x : v) x = -rng.uniform(0.2, 4.0);
        double lambda = std::vector<double>{0.0, 0.5, 2.0}[t % 3];
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm}) {
            Graph g;
            std::vector<NodeId> vs;
            for (double x : v) vs.push_back(g.leaf(Tensor::scalar(x)));
            AggregateNodes agg = aggregate_node(g, vs, kind, LambdaInput::fixed(lambda));
            g.backward(agg.f);
            for (std::size_t i = 0; i < n; ++i) {
                double fd = fd_wrt(v, kind, lambda, i);
                CHECK(g.grad(vs[i]).data[0] == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("gman* objective") {
    SUBCASE("c = 0 equals the plain aggregate at lambda = softplus(raw)") {
        std::vector<double> v{-1.0, -3.0, -0.7};
        Graph g;
        std::vector<NodeId> vs;
        for (double x : v) vs.push_back(g.leaf(Tensor::scalar(x)));
        NodeId raw = g.leaf(Tensor::scalar(0.4));
        GmanStarNodes star = gman_star_objective(g, vs, raw, 0.0, AggregationKind::Am);
        CHECK(g.value(star.objective).data[0] ==
              doctest::Approx(aggregate_value(v, AggregationKind::Am, lambda_reparam(0.4)))
                  .epsilon(1e-12));
    }
    SUBCASE("hand-evaluated chain: V=(-1,-2), am, raw=0, c=0.001") {
        // softplus(0)=ln 2; weights (2/3, 1/3); am = -4/3; objective = -4/3 - 0.001 ln 2
        Graph g;
        std::vector<NodeId> vs{g.leaf(Tensor::scalar(-1.0)), g.leaf(Tensor::scalar(-2.0))};
        NodeId raw = g.leaf(Tensor::scalar(0.0));
        GmanStarNodes star = gman_star_objective(g, vs, raw, 0.001, AggregationKind::Am);
        CHECK(g.value(star.lambda).data[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
        CHECK(g.value(star.f).data[0] == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
        CHECK(g.value(star.objective).data[0] ==
              doctest::Approx(-4.0 / 3.0 - 0.001 * std::log(2.0)).epsilon(1e-12));
        CHECK(g.value(star.weights[0]).data[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("derivative in the raw temperature matches finite differences within 1e-6") {
        RngStream rng(43);
        for (int t = 0; t < 40; ++t) {
            std::size_t n = 2 + rng.next_u64() % 4;
            std::vector<double> v(n);
            for (double& x : v) x = -rng.uniform(0.2, 4.0);
            double raw0 = rng.uniform(-3.0, 3.0);
            AggregationKind kind = std::vector<AggregationKind>{
                AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm}[t % 3];

            auto value_at = [&](double raw) {
                Graph g;
                std::vector<NodeId> vs;
                for (double x : v) vs.push_back(g.leaf(Tensor::scalar(x)));
                NodeId r = g.leaf(Tensor::scalar(raw));
                return g.value(gman_star_objective(g, vs, r, 0.001, kind).objective).data[0];
            };
            Graph g;
            std::vector<NodeId> vs;
            for (double x : v) vs.push_back(g.leaf(Tensor::scalar(x)));
            NodeId r = g.leaf(Tensor::scalar(raw0));
            GmanStarNodes star = gman_star_objective(g, vs, r, 0.001, kind);
            g.backward(star.objective);
            double h = 1e-6;
            double fd = (value_at(raw0 + h) - value_at(raw0 - h)) / (2.0 * h);
            CHECK(g.grad(r).data[0] == doctest::Approx(fd).epsilon(1e-6));
        }
    }
    SUBCASE("max kind is rejected") {
        Graph g;
        std::vector<NodeId> vs{g.leaf(Tensor::scalar(-1.0)), g.leaf(Tensor::scalar(-2.0))};
        NodeId raw = g.leaf(Tensor::scalar(0.0));
        CHECK_THROWS_AS(gman_star_objective(g, vs, raw, 0.001, AggregationKind::Max),
                        std::invalid_argument);
    }
}

TEST_CASE("soft-mean laws: boundedness, monotonicity, ordering, permutation") {
    RngStream rng(47);
    static const double grid[] = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0};
    for (int t = 0; t < 300; ++t) {
        std::size_t n = 2 + rng.next_u64() % 7;
        std::vector<double> v(n);
        for (double& x : v) x = -rng.uniform(0.1, 5.0);
        double vmax = *std::max_element(v.begin(), v.end());
        double vmin = *std::min_element(v.begin(), v.end());
        bool distinct = vmax - vmin > 1e-9;
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm}) {
            double prev = 0.0;
            for (std::size_t gi = 0; gi < std::size(grid); ++gi) {
                double agg = aggregate_value(v, kind, grid[gi]);
                CHECK(agg >= vmin - 1e-12);
                CHECK(agg <= vmax + 1e-12);
                if (gi > 0 && distinct) {
                    CHECK(agg >= prev);
                    // strictness is only resolvable before the aggregate
                    // saturates onto the max within double precision
                    if (vmax - prev > 1e-9) CHECK(agg > prev);
                }
                prev = agg;
            }
        }
        if (distinct) {
            double am = aggregate_value(v, AggregationKind::Am, 0.0);
            double gm = aggregate_value(v, AggregationKind::Gm, 0.0);
            double hm = aggregate_value(v, AggregationKind::Hm, 0.0);
            CHECK(am < gm);
            CHECK(gm < hm);
            CHECK(hm < vmax);
        }
        std::vector<double> shuffled = v;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
        }
        for (AggregationKind kind :
             {AggregationKind::Am, AggregationKind::Gm, AggregationKind::Hm, AggregationKind::Max}) {
            CHECK(aggregate_value(shuffled, kind, 1.5) ==
                  doctest::Approx(aggregate_value(v, kind, 1.5)).epsilon(1e-12));
        }
    }
}

TEST_CASE("product-form identity of the mean original objective") {
    // (1/N) sum_i log(1 - D_i) == (1/N) log prod_i (1 - D_i), per sample
    RngStream rng(53);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 1 + rng.next_u64() % 8;
        double sum = 0.0, prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = rng.uniform(0.01, 0.99);
            sum += std::log(1.0 - d);
            prod *= 1.0 - d;
        }
        CHECK(std::abs(sum / n - std::log(prod) / n) < 1e-12);
    }
}
