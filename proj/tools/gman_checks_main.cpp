// gman-checks: runs the cross-module verification suite (analytic identities,
// soft-mean laws, finite-difference gradient checks) and emits the report as
// CSV plus human-readable text. Nonzero exit on any failure.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>

#include "gman/checks.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 7;
    std::string csv_path;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
            seed = std::strtoull(argv[++i], nullptr, 10);
        } else if (std::strcmp(argv[i], "--csv") == 0 && i + 1 < argc) {
            csv_path = argv[++i];
        } else {
            std::fprintf(stderr, "usage: gman-checks [--seed N] [--csv FILE]\n");
            return 2;
        }
    }

    std::vector<gman::CheckReport> reports = gman::run_all_checks(seed);
    std::cout << gman::checks_to_text(reports);
    if (!csv_path.empty()) {
        std::ofstream os(csv_path, std::ios::trunc);
        os << gman::checks_to_csv(reports);
        std::cout << "csv -> " << csv_path << "\n";
    }
    for (const auto& r : reports) {
        if (!r.passed) return 1;
    }
    return 0;
}
