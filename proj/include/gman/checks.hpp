#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gman {

struct CheckReport {
    std::string id;
    std::size_t instances = 0;
    double worst_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::int64_t ms = 0;
    std::vector<std::string> details;
};

// Scalar function of a flat coordinate vector: `eval` re-computes the value
// from scratch (pure), `grad` returns the reverse-mode gradient. Both see the
// same coordinates.
struct GradProbe {
    std::string name;
    std::vector<double> x0;
    std::function<double(std::span<const double>)> eval;
    std::function<std::vector<double>(std::span<const double>)> grad;
};

// Worst relative error between the reverse-mode gradient and central finite
// differences (step h), with a small magnitude floor. Coordinates where the
// one-sided differences disagree (a ReLU kink inside the probe interval) are
// skipped; finite differences are invalid there, not the gradient.
double gradcheck_worst_error(const GradProbe& probe, double h = 1e-5);

// Random distribution pairs: |V(D*) - (-log 4 + 2 JSD)| < 1e-9, with the
// forced equal-distribution and disjoint-support cases included.
CheckReport check_eq2_identity(std::size_t trials, std::size_t max_support, std::uint64_t seed);

// Soft-mean law suite over random negative utility vectors: boundedness,
// lambda=0 closed forms, lambda=100 max limit, strict lambda-monotonicity,
// mean ordering at lambda=0, permutation invariance. Errors are normalized
// by each law's own tolerance, so the report gates at 1.0.
CheckReport check_softmean_laws(std::size_t trials, std::uint64_t seed);

// Per-sample identity between the mean of log(1-D_i) and the mean of the
// log of the product, to 1e-12.
CheckReport check_eq6_identity(std::size_t trials, std::uint64_t seed);

// Finite-difference verification of every differentiable operation:
// primitives, MLP compositions, batchnorm, squashed sigmoid, both generator
// loss modes, every aggregate kind (w.r.t. V and the raw temperature).
CheckReport check_gradcheck_all(std::size_t instances, std::uint64_t seed);

std::vector<CheckReport> run_all_checks(std::uint64_t seed);

std::string checks_to_csv(const std::vector<CheckReport>& reports);
std::string checks_to_text(const std::vector<CheckReport>& reports);

} // namespace gman
