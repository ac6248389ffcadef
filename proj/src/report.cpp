#include "gman/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gman {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int prec = 9) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::map<std::string, std::vector<LoadedRun*>> group_by_family(const std::vector<LoadedRun*>& runs) {
    std::map<std::string, std::vector<LoadedRun*>> fam;
    for (LoadedRun* r : runs) {
        std::string key = r->manifest.variant.empty() ? "unnamed" : r->manifest.variant;
        fam[key].push_back(r);
    }
    return fam;
}

} // namespace

std::vector<FamilySummary> write_report(const std::vector<LoadedRun*>& runs, const fs::path& out_dir,
                                        const ReportOptions& opts) {
    if (runs.empty()) throw std::invalid_argument("report: need at least one run");
    fs::create_directories(out_dir);

    // One shared iteration grid across every run.
    const std::vector<LogRecord>& ref = runs.front()->records;
    for (const LoadedRun* r : runs) {
        if (r->records.size() != ref.size()) {
            throw std::invalid_argument("report: mismatched iteration grids (" +
                                        r->manifest.run_id + ")");
        }
        for (std::size_t i = 0; i < ref.size(); ++i) {
            if (r->records[i].iter != ref[i].iter) {
                throw std::invalid_argument("report: mismatched iteration grids (" +
                                            r->manifest.run_id + ")");
            }
        }
    }

    auto families = group_by_family(runs);

    // Mean-F curves with +-1 sigma band data.
    std::ostringstream fcsv;
    fcsv << "family,iter,mean_F,stdev_F,runs\n";
    std::map<std::string, std::vector<std::pair<double, double>>> mean_series;
    for (auto& [family, members] : families) {
        for (std::size_t i = 0; i < ref.size(); ++i) {
            double mean = 0.0;
            for (LoadedRun* r : members) mean += r->records[i].f;
            mean /= static_cast<double>(members.size());
            double sd = 0.0;
            if (members.size() > 1) {
                for (LoadedRun* r : members) {
                    double d = r->records[i].f - mean;
                    sd += d * d;
                }
                sd = std::sqrt(sd / static_cast<double>(members.size() - 1));
            }
            fcsv << family << ',' << ref[i].iter << ',' << fmt(mean) << ',' << fmt(sd) << ','
                 << members.size() << '\n';
            mean_series[family].emplace_back(static_cast<double>(ref[i].iter), mean);
        }
    }
    atomic_write_text(out_dir / "f_curves.csv", fcsv.str());
    write_svg_plot(out_dir / "f_curves.svg", "generator objective F (family means)", mean_series,
                   opts.deterministic_plots);

    // Sliding stdev per run, plus per-family steady-state iterations.
    std::vector<FamilySummary> summaries;
    std::ostringstream scsv, sscsv, lcsv;
    scsv << "family,run,iter,sliding_stdev\n";
    sscsv << "family,run,first_window_stdev,threshold,steady_iteration\n";
    lcsv << "family,run,iter,lambda\n";
    std::map<std::string, std::vector<std::pair<double, double>>> stdev_series, lambda_series;
    for (auto& [family, members] : families) {
        FamilySummary sum;
        sum.family = family;
        std::vector<std::vector<double>> stdevs;
        std::vector<double> first_window;
        for (LoadedRun* r : members) {
            std::vector<double> f(r->records.size());
            for (std::size_t i = 0; i < f.size(); ++i) f[i] = r->records[i].f;
            if (opts.window > f.size()) {
                throw std::invalid_argument("report: window " + std::to_string(opts.window) +
                                            " exceeds run length of " + r->manifest.run_id);
            }
            stdevs.push_back(sliding_stdev(f, opts.window));
            first_window.push_back(stdevs.back().front());
        }
        sum.threshold = opts.threshold_frac * median(first_window);
        for (std::size_t k = 0; k < members.size(); ++k) {
            LoadedRun* r = members[k];
            for (std::size_t j = 0; j < stdevs[k].size(); ++j) {
                std::int64_t iter = r->records[j + opts.window - 1].iter;
                scsv << family << ',' << r->manifest.run_id << ',' << iter << ','
                     << fmt(stdevs[k][j]) << '\n';
                if (members.size() == 1 || k == 0) {
                    stdev_series[family + "/" + r->manifest.run_id].emplace_back(
                        static_cast<double>(iter), stdevs[k][j]);
                }
            }
            auto idx = steady_state_index(stdevs[k], sum.threshold);
            std::int64_t steady = idx ? r->records[*idx + opts.window - 1].iter : -1;
            sum.steady_iterations.push_back(steady);
            sum.run_ids.push_back(r->manifest.run_id);
            sscsv << family << ',' << r->manifest.run_id << ',' << fmt(first_window[k]) << ','
                  << fmt(sum.threshold) << ',' << steady << '\n';

            for (const LogRecord& rec : r->records) {
                if (rec.lambda) {
                    lcsv << family << ',' << r->manifest.run_id << ',' << rec.iter << ','
                         << fmt(*rec.lambda) << '\n';
                    lambda_series[family + "/" + r->manifest.run_id].emplace_back(
                        static_cast<double>(rec.iter), *rec.lambda);
                }
            }
        }
        summaries.push_back(std::move(sum));
    }
    atomic_write_text(out_dir / "sliding_stdev.csv", scsv.str());
    atomic_write_text(out_dir / "steady_state.csv", sscsv.str());
    atomic_write_text(out_dir / "lambda.csv", lcsv.str());
    write_svg_plot(out_dir / "sliding_stdev.svg", "sliding stdev of F", stdev_series,
                   opts.deterministic_plots);
    if (!lambda_series.empty()) {
        write_svg_plot(out_dir / "lambda.svg", "learned temperature lambda", lambda_series,
                       opts.deterministic_plots);
    }

    // Mode coverage for mixture datasets.
    std::ostringstream ccsv;
    ccsv << "family,run,covered,modes,high_quality_fraction,samples\n";
    for (auto& [family, members] : families) {
        for (LoadedRun* r : members) {
            if (!r->system.config.dataset.is_mixture()) continue;
            MixtureSpec mix = r->system.config.dataset.mixture();
            RngStream noise(derive_seed(opts.eval_seed, StreamPurpose::CoverageNoise, r->manifest.seed));
            Tensor samples = generate_data_space(r->system.config.dataset.model_scale,
                                                 r->system.gen_spec, r->system.generator,
                                                 opts.coverage_samples, r->system.config.latent_dim,
                                                 noise);
            ModeCoverage cov =
                mode_coverage(samples, mix, opts.coverage_radius_mult, opts.coverage_min_count);
            ccsv << family << ',' << r->manifest.run_id << ',' << cov.covered << ','
                 << cov.total_modes << ',' << fmt(cov.high_quality_fraction) << ',' << cov.samples
                 << '\n';
        }
    }
    atomic_write_text(out_dir / "mode_coverage.csv", ccsv.str());
    return summaries;
}

Tournament gmam_tournament(std::vector<LoadedRun>& runs, std::size_t n_eval,
                           std::uint64_t eval_seed) {
    std::map<std::string, std::vector<LoadedRun*>> fam;
    for (LoadedRun& r : runs) {
        fam[r.manifest.variant.empty() ? "unnamed" : r.manifest.variant].push_back(&r);
    }
    Tournament t;
    for (auto& [name, members] : fam) {
        t.variants.push_back(name);
        std::sort(members.begin(), members.end(),
                  [](const LoadedRun* a, const LoadedRun* b) { return a->manifest.seed < b->manifest.seed; });
    }
    std::size_t k = t.variants.size();
    t.cells.assign(k, std::vector<TournamentCell>(k));

    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            auto& runs_a = fam[t.variants[a]];
            auto& runs_b = fam[t.variants[b]];
            std::size_t pairs = std::min(runs_a.size(), runs_b.size());
            std::vector<double> scores;
            for (std::size_t p = 0; p < pairs; ++p) {
                GmamResult r = gmam(runs_a[p]->system, runs_b[p]->system, n_eval,
                                    splitmix64(eval_seed + p));
                scores.push_back(r.score);
            }
            double mean = 0.0;
            for (double s : scores) mean += s;
            mean /= static_cast<double>(scores.size());
            double sd = 0.0;
            if (scores.size() > 1) {
                for (double s : scores) sd += (s - mean) * (s - mean);
                sd = std::sqrt(sd / static_cast<double>(scores.size() - 1));
            }
            // score > 0 favors side b: cell[row=a][col=b] holds the score as
            // computed, cell[b][a] its exact negation.
            t.cells[a][b] = {mean, sd, pairs};
            t.cells[b][a] = {-mean, sd, pairs};
        }
    }
    t.column_scores.assign(k, 0.0);
    for (std::size_t col = 0; col < k; ++col) {
        for (std::size_t row = 0; row < k; ++row) {
            if (row != col) t.column_scores[col] += t.cells[row][col].mean;
        }
    }
    return t;
}

void write_tournament_csv(const Tournament& t, const fs::path& matrix_csv, const fs::path& pairs_csv,
                          const std::vector<std::string>& pair_rows) {
    std::ostringstream os;
    os << "score,variant";
    for (const std::string& v : t.variants) os << ',' << v;
    os << '\n';
    for (std::size_t row = 0; row < t.variants.size(); ++row) {
        os << fmt(t.column_scores[row], 6) << ',' << t.variants[row];
        for (std::size_t col = 0; col < t.variants.size(); ++col) {
            if (row == col) {
                os << ",-";
            } else {
                os << ',' << fmt(t.cells[row][col].mean, 6) << "+-"
                   << fmt(t.cells[row][col].stdev, 6);
            }
        }
        os << '\n';
    }
    atomic_write_text(matrix_csv, os.str());

    std::ostringstream ps;
    ps << "a,b,seed_a,seed_b,score,fa_gb,fa_ga,fb_ga,fb_gb\n";
    for (const std::string& row : pair_rows) ps << row << '\n';
    atomic_write_text(pairs_csv, ps.str());
}

void write_svg_plot(const fs::path& path, const std::string& title,
                    const std::map<std::string, std::vector<std::pair<double, double>>>& series,
                    bool deterministic) {
    const double width = 960, height = 540, ml = 70, mr = 20, mt = 40, mb = 45;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& [label, pts] : series) {
        for (auto [x, y] : pts) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "' viewBox='0 0 " << width << ' ' << height << "'>\n";
    if (!deterministic) os << "<!-- generated " << iso8601_utc_now() << " -->\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-family='monospace' "
       << "font-size='16'>" << title << "</text>\n";
    os << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
       << height - mb << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
       << "' stroke='black'/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        double xv = xmin + (xmax - xmin) * tick / 4.0;
        double yv = ymin + (ymax - ymin) * tick / 4.0;
        os << "<text x='" << px(xv) << "' y='" << height - mb + 18
           << "' text-anchor='middle' font-family='monospace' font-size='11'>" << fmt(xv, 6)
           << "</text>\n";
        os << "<text x='" << ml - 6 << "' y='" << py(yv) + 4
           << "' text-anchor='end' font-family='monospace' font-size='11'>" << fmt(yv, 4)
           << "</text>\n";
    }
    std::size_t ci = 0;
    double ly = mt + 8;
    for (const auto& [label, pts] : series) {
        const char* color = colors[ci % 8];
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2' points='";
        for (auto [x, y] : pts) os << fmt(px(x), 6) << ',' << fmt(py(y), 6) << ' ';
        os << "'/>\n";
        os << "<text x='" << width - mr - 6 << "' y='" << ly << "' text-anchor='end' "
           << "font-family='monospace' font-size='11' fill='" << color << "'>" << label
           << "</text>\n";
        ly += 14;
        ++ci;
    }
    os << "</svg>\n";
    atomic_write_text(path, os.str());
}

} // namespace gman
