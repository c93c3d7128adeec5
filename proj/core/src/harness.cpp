#include "knotfit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "knotfit/csv.hpp"
#include "knotfit/fit1d.hpp"
#include "knotfit/metrics.hpp"
#include "knotfit/parallel.hpp"
#include "knotfit/rng.hpp"

namespace knotfit {

namespace {

constexpr double kGridMatchTol = 1e-12;

std::uint64_t rep_seed(const ExperimentConfig& cfg, int replication) {
    return derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(replication));
}

/// Grid indices of values matching the targets to within kGridMatchTol.
std::vector<int> locate_on_grid(const std::vector<double>& grid,
                                const std::vector<double>& targets) {
    std::vector<int> idx;
    for (double t : targets) {
        int best = 0;
        double best_d = std::abs(grid[0] - t);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double d = std::abs(grid[i] - t);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        if (best_d > kGridMatchTol) {
            throw std::runtime_error("knots-in-sample mode requires knots on the reference grid");
        }
        idx.push_back(best);
    }
    return idx;
}

/// Nested index sequence: pinned indices first, then a seeded permutation of
/// the rest.  Prefixes of the sequence are the samples for growing n.
std::vector<int> nested_indices(int grid_size, const std::vector<int>& pinned,
                                std::uint64_t seed) {
    std::vector<char> is_pinned(static_cast<std::size_t>(grid_size), 0);
    for (int i : pinned) is_pinned[static_cast<std::size_t>(i)] = 1;
    std::vector<int> rest;
    rest.reserve(static_cast<std::size_t>(grid_size) - pinned.size());
    for (int i = 0; i < grid_size; ++i) {
        if (!is_pinned[static_cast<std::size_t>(i)]) rest.push_back(i);
    }
    Rng rng(seed);
    for (std::size_t i = rest.size(); i > 1; --i) {
        std::swap(rest[i - 1], rest[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(i)))]);
    }
    std::vector<int> out = pinned;
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

/// Distinct uniform draws; duplicates are redrawn so downstream sorting
/// never sees coincident points.
std::vector<double> uniform_draws(int count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(out.size()) < count) {
        const double v = rng.uniform();
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

struct AxisSample {
    std::vector<double> values;  // sorted
    std::vector<std::uint64_t> noise_keys;  // aligned with values
};

/// One axis worth of observation locations plus stable noise keys.
AxisSample sample_axis(const ExperimentConfig& cfg, const std::vector<double>& grid,
                       const std::vector<double>& knots, int n, std::uint64_t point_seed,
                       std::uint64_t key_offset) {
    AxisSample out;
    std::vector<std::pair<double, std::uint64_t>> pts;
    if (cfg.mode == SamplingMode::KnotsInSample) {
        if (n > static_cast<int>(grid.size())) {
            throw std::invalid_argument("sample size exceeds the reference grid");
        }
        const std::vector<int> pinned = locate_on_grid(grid, knots);
        if (n < static_cast<int>(pinned.size())) {
            throw std::invalid_argument("sample size smaller than the pinned knot set");
        }
        const std::vector<int> seq = nested_indices(static_cast<int>(grid.size()), pinned, point_seed);
        for (int i = 0; i < n; ++i) {
            const int g = seq[static_cast<std::size_t>(i)];
            pts.emplace_back(grid[static_cast<std::size_t>(g)],
                             key_offset + static_cast<std::uint64_t>(g));
        }
    } else {
        const std::vector<double> draws = uniform_draws(n, point_seed);
        for (int i = 0; i < n; ++i) {
            pts.emplace_back(draws[static_cast<std::size_t>(i)],
                             key_offset + static_cast<std::uint64_t>(i));
        }
    }
    std::sort(pts.begin(), pts.end());
    for (const auto& [v, k] : pts) {
        out.values.push_back(v);
        out.noise_keys.push_back(k);
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> reference_grid(int n_points) {
    std::vector<double> g(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        g[static_cast<std::size_t>(i)] = static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    return g;
}

Sample1D sample_observations_1d(const ExperimentConfig& cfg, int n, int replication) {
    const SyntheticFunction fn = SyntheticFunction::by_name(cfg.function);
    if (fn.d != 1) throw std::invalid_argument("sample_observations_1d needs a 1-d function");
    const std::vector<double> grid = reference_grid(cfg.grid_points);
    const std::uint64_t rs = rep_seed(cfg, replication);
    const AxisSample axis = sample_axis(cfg, grid, fn.true_knots[0], n,
                                        derive_seed(rs, 11), 0);
    const std::uint64_t noise_seed = derive_seed(rs, 21);

    Sample1D out;
    out.x = axis.values;
    out.y.resize(n);
    for (int i = 0; i < n; ++i) {
        out.y[i] = fn(out.x[static_cast<std::size_t>(i)]) +
                   cfg.sigma * gaussian_at(noise_seed, axis.noise_keys[static_cast<std::size_t>(i)]);
    }
    return out;
}

GridDataset sample_observations_2d(const ExperimentConfig& cfg, int n_axis, int replication) {
    const SyntheticFunction fn = SyntheticFunction::by_name(cfg.function);
    if (fn.d != 2) throw std::invalid_argument("sample_observations_2d needs a 2-d function");
    const std::vector<double> grid = reference_grid(cfg.grid_points);
    const std::uint64_t rs = rep_seed(cfg, replication);
    const AxisSample ax1 = sample_axis(cfg, grid, fn.true_knots[0], n_axis,
                                       derive_seed(rs, 11), 0);
    const AxisSample ax2 = sample_axis(cfg, grid, fn.true_knots[1], n_axis,
                                       derive_seed(rs, 12), 0);
    const std::uint64_t noise_seed = derive_seed(rs, 21);
    const std::uint64_t stride = static_cast<std::uint64_t>(
        std::max(cfg.grid_points, n_axis));

    Eigen::VectorXd y(n_axis * n_axis);
    for (int i = 0; i < n_axis; ++i) {
        for (int j = 0; j < n_axis; ++j) {
            const std::uint64_t key =
                ax1.noise_keys[static_cast<std::size_t>(i)] * stride +
                ax2.noise_keys[static_cast<std::size_t>(j)];
            y[i * n_axis + j] = fn(ax1.values[static_cast<std::size_t>(i)],
                                   ax2.values[static_cast<std::size_t>(j)]) +
                                cfg.sigma * gaussian_at(noise_seed, key);
        }
    }
    return GridDataset::make(ax1.values, ax2.values, std::move(y));
}

ScatteredDataset sample_observations_nd(const ExperimentConfig& cfg, int n, int replication) {
    const SyntheticFunction fn = SyntheticFunction::by_name(cfg.function);
    const int d = fn.d;
    const std::uint64_t rs = rep_seed(cfg, replication);
    Rng rng(derive_seed(rs, 11));
    const std::uint64_t noise_seed = derive_seed(rs, 21);

    Eigen::MatrixXd pts(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        double p[8];
        for (int c = 0; c < d; ++c) {
            p[c] = rng.uniform();
            pts(i, c) = p[c];
        }
        y[i] = fn(std::span<const double>(p, static_cast<std::size_t>(d))) +
               cfg.sigma * gaussian_at(noise_seed, static_cast<std::uint64_t>(i));
    }
    return ScatteredDataset::make(std::move(pts), std::move(y));
}

namespace {

void fill_knot_metrics(CellResult& cell, const std::vector<std::vector<double>>& truth,
                       const std::vector<std::vector<double>>& estimate) {
    double worst_d1 = 0.0, worst_d2 = 0.0;
    bool any = false;
    for (std::size_t dim = 0; dim < truth.size(); ++dim) {
        cell.k_per_dim.push_back(static_cast<int>(estimate[dim].size()));
        if (truth[dim].empty() || estimate[dim].empty()) continue;
        const double d1 = directed_hausdorff(truth[dim], estimate[dim]);
        const double d2 = directed_hausdorff(estimate[dim], truth[dim]);
        cell.d1_per_dim.push_back(d1);
        cell.d2_per_dim.push_back(d2);
        worst_d1 = std::max(worst_d1, d1);
        worst_d2 = std::max(worst_d2, d2);
        any = true;
    }
    int k_total = 0;
    for (int k : cell.k_per_dim) k_total += k;
    cell.k_total = k_total;
    if (any) {
        cell.d1 = worst_d1;
        cell.d2 = worst_d2;
    }
}

void run_cell_1d(const ExperimentConfig& cfg, const SyntheticFunction& fn,
                 const EvaluationGrid& eval, int n, int replication, CellResult& cell) {
    const Sample1D sample = sample_observations_1d(cfg, n, replication);

    Fit1DOptions opts;
    opts.degree = cfg.degree;
    opts.path = cfg.path;
    opts.bounds = {{0.0, 1.0}};
    const Fit1DResult fit = fit_1d(sample.y, sample.x, opts);

    cell.lambda_ebic = fit.model.lambda;
    fill_knot_metrics(cell, fn.true_knots, {fit.model.knots.interior()});

    cell.sup_ebic = normalized_sup_norm(fit.model.predict(eval.points), eval);

    std::vector<Eigen::VectorXd> per_lambda;
    per_lambda.reserve(fit.per_lambda.size());
    for (const auto& rec : fit.per_lambda) {
        per_lambda.push_back(rec.model.predict(eval.points));
    }
    const int opt = lambda_opt_index(per_lambda, eval);
    cell.sup_opt = normalized_sup_norm(per_lambda[static_cast<std::size_t>(opt)], eval);
}

void run_cell_2d(const ExperimentConfig& cfg, const SyntheticFunction& fn,
                 const std::vector<double>& eval_axis, const Eigen::MatrixXd& truth,
                 double range, int n_axis, int replication, CellResult& cell) {
    const GridDataset data = sample_observations_2d(cfg, n_axis, replication);

    Fit2DOptions opts;
    opts.degree = cfg.degree;
    opts.path = cfg.path;
    opts.bounds1 = {{0.0, 1.0}};
    opts.bounds2 = {{0.0, 1.0}};
    const Fit2DResult fit = fit_2d(data, opts);

    fill_knot_metrics(cell, fn.true_knots,
                      {fit.model.knots[0].interior(), fit.model.knots[1].interior()});

    const Eigen::MatrixXd pred = fit.model.predict_grid(eval_axis, eval_axis);
    cell.sup_ebic = (pred - truth).cwiseAbs().maxCoeff() / range;

    // oracle selection: best normalized error over every scored combination
    double best = std::numeric_limits<double>::infinity();
    const int q = cfg.degree;
    std::map<std::vector<double>, Eigen::MatrixXd> basis_cache;
    const auto eval_design = [&](const std::vector<double>& ks) -> const Eigen::MatrixXd& {
        auto it = basis_cache.find(ks);
        if (it == basis_cache.end()) {
            AugmentedKnotVector akv(ks, q + 1, 0.0, 1.0);
            it = basis_cache.emplace(ks, design_matrix(akv, eval_axis)).first;
        }
        return it->second;
    };
    for (const auto& dfit : fit.distinct) {
        if (dfit.fit.skipped) continue;
        const Eigen::MatrixXd& b1 = eval_design(dfit.knots1);
        const Eigen::MatrixXd& b2 = eval_design(dfit.knots2);
        const double sup =
            (b1 * dfit.fit.gamma * b2.transpose() - truth).cwiseAbs().maxCoeff() / range;
        best = std::min(best, sup);
    }
    if (std::isfinite(best)) cell.sup_opt = best;
}

void run_cell_scattered(const ExperimentConfig& cfg, const SyntheticFunction& fn,
                        const std::vector<double>& eval_axis, const Eigen::MatrixXd& truth,
                        double range, int n, int replication, CellResult& cell) {
    const ScatteredDataset data = sample_observations_nd(cfg, n, replication);

    FitNdOptions opts;
    opts.degree = cfg.degree;
    opts.path = cfg.path;
    opts.seed = derive_seed(rep_seed(cfg, replication), 31);
    opts.bounds.assign(static_cast<std::size_t>(fn.d), {0.0, 1.0});
    const FitNdResult fit = fit_nd(data, opts);

    std::vector<std::vector<double>> estimate;
    for (const auto& akv : fit.model.knots) estimate.push_back(akv.interior());
    fill_knot_metrics(cell, fn.true_knots, estimate);

    const Eigen::MatrixXd pred = fit.model.predict_grid(eval_axis, eval_axis);
    cell.sup_ebic = (pred - truth).cwiseAbs().maxCoeff() / range;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"f1-noise", "f1-sampling", "f2-noise",
                                                   "f2-sampling", "f2-cluster"};
    return names;
}

ExperimentConfig make_experiment(const std::string& name, double sigma, int replications,
                                 std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.name = name;
    cfg.seed = seed;
    cfg.replications = replications > 0 ? replications : 10;
    if (name == "f1-noise" || name == "f1-sampling") {
        cfg.function = "f1";
        cfg.kind = ExperimentKind::OneDim;
        cfg.mode = name == "f1-noise" ? SamplingMode::KnotsInSample
                                      : SamplingMode::UniformRandom;
        cfg.sigma = sigma >= 0.0 ? sigma : (name == "f1-noise" ? 0.1 : 0.05);
        cfg.schedule = {7, 10, 20, 40, 70, 100};
    } else if (name == "f2-noise" || name == "f2-sampling") {
        cfg.function = "f2";
        cfg.kind = ExperimentKind::Grid2D;
        cfg.mode = name == "f2-noise" ? SamplingMode::KnotsInSample
                                      : SamplingMode::UniformRandom;
        cfg.sigma = sigma >= 0.0 ? sigma : 0.01;
        cfg.schedule = {10, 20, 30, 40};
    } else if (name == "f2-cluster") {
        cfg.function = "f2";
        cfg.kind = ExperimentKind::Scattered;
        cfg.mode = SamplingMode::UniformRandom;
        cfg.sigma = sigma >= 0.0 ? sigma : 0.01;
        cfg.schedule = {400, 900, 1600};
    } else {
        std::ostringstream msg;
        msg << "unknown experiment '" << name << "' (valid:";
        for (const auto& v : experiment_names()) msg << ' ' << v;
        msg << ')';
        throw std::invalid_argument(msg.str());
    }
    return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const SyntheticFunction fn = SyntheticFunction::by_name(cfg.function);
    if (cfg.schedule.empty()) throw std::invalid_argument("experiment schedule is empty");
    if (cfg.replications < 1) throw std::invalid_argument("need at least one replication");
    if (cfg.kind == ExperimentKind::Scattered && fn.d != 2) {
        throw std::invalid_argument("scattered experiments support two-dimensional functions");
    }

    // shared evaluation grid and truth
    const std::vector<double> eval_axis = reference_grid(cfg.grid_points);
    EvaluationGrid eval_1d;
    Eigen::MatrixXd truth_2d;
    double range_2d = 0.0;
    if (fn.d == 1) {
        Eigen::VectorXd truth(cfg.grid_points);
        for (int i = 0; i < cfg.grid_points; ++i) truth[i] = fn(eval_axis[static_cast<std::size_t>(i)]);
        eval_1d = EvaluationGrid::make(eval_axis, std::move(truth));
    } else {
        truth_2d.resize(cfg.grid_points, cfg.grid_points);
        for (int i = 0; i < cfg.grid_points; ++i) {
            for (int j = 0; j < cfg.grid_points; ++j) {
                truth_2d(i, j) = fn(eval_axis[static_cast<std::size_t>(i)], eval_axis[static_cast<std::size_t>(j)]);
            }
        }
        range_2d = truth_2d.maxCoeff() - truth_2d.minCoeff();
    }

    ExperimentReport report;
    report.config = cfg;
    const int n_cells = static_cast<int>(cfg.schedule.size());
    const int reps = cfg.replications;
    report.cells.resize(static_cast<std::size_t>(n_cells) * static_cast<std::size_t>(reps));

    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
        for (int s = 0; s < n_cells; ++s) {
            CellResult& cell = report.cells[static_cast<std::size_t>(s) * static_cast<std::size_t>(reps) + rep];
            const int n_sched = cfg.schedule[static_cast<std::size_t>(s)];
            cell.n = cfg.kind == ExperimentKind::Grid2D ? n_sched * n_sched : n_sched;
            cell.replication = static_cast<int>(rep);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                switch (cfg.kind) {
                    case ExperimentKind::OneDim:
                        run_cell_1d(cfg, fn, eval_1d, n_sched, static_cast<int>(rep), cell);
                        break;
                    case ExperimentKind::Grid2D:
                        run_cell_2d(cfg, fn, eval_axis, truth_2d, range_2d, n_sched,
                                    static_cast<int>(rep), cell);
                        break;
                    case ExperimentKind::Scattered:
                        run_cell_scattered(cfg, fn, eval_axis, truth_2d, range_2d, n_sched,
                                           static_cast<int>(rep), cell);
                        break;
                }
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            cell.wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        }
    });
    return report;
}

namespace {

void put(std::ostream& out, const std::optional<double>& v) {
    if (v) out << format_double(*v);
}

}  // namespace

void write_results_csv(const ExperimentReport& report, std::ostream& out) {
    out << "function,n,replication,sigma,q,lambda_ebic,k_lambda,d1,d2,supnorm_ebic,"
           "supnorm_opt,wall_ms\n";
    for (const auto& cell : report.cells) {
        out << report.config.function << ',' << cell.n << ',' << cell.replication << ','
            << format_double(report.config.sigma) << ',' << report.config.degree << ',';
        put(out, cell.lambda_ebic);
        out << ',';
        if (cell.k_total) out << *cell.k_total;
        out << ',';
        put(out, cell.d1);
        out << ',';
        put(out, cell.d2);
        out << ',';
        put(out, cell.sup_ebic);
        out << ',';
        put(out, cell.sup_opt);
        out << ',';
        if (report.config.timing) out << format_double(cell.wall_ms);
        out << '\n';
    }
}

void write_summary_csv(const ExperimentReport& report, std::ostream& out) {
    out << "function,n,sigma,q,replications,failures,median_k,median_d1,median_d2,"
           "mean_supnorm_ebic,mean_supnorm_opt,median_wall_ms\n";
    std::vector<int> ns;
    for (const auto& cell : report.cells) {
        if (std::find(ns.begin(), ns.end(), cell.n) == ns.end()) ns.push_back(cell.n);
    }
    for (int n : ns) {
        std::vector<double> ks, d1s, d2s, sup_e, sup_o, walls;
        int failures = 0;
        for (const auto& cell : report.cells) {
            if (cell.n != n) continue;
            if (cell.failed) {
                ++failures;
                continue;
            }
            if (cell.k_total) ks.push_back(static_cast<double>(*cell.k_total));
            if (cell.d1) d1s.push_back(*cell.d1);
            if (cell.d2) d2s.push_back(*cell.d2);
            if (cell.sup_ebic) sup_e.push_back(*cell.sup_ebic);
            if (cell.sup_opt) sup_o.push_back(*cell.sup_opt);
            walls.push_back(cell.wall_ms);
        }
        out << report.config.function << ',' << n << ','
            << format_double(report.config.sigma) << ',' << report.config.degree << ','
            << report.config.replications << ',' << failures << ',';
        if (!ks.empty()) out << format_double(median(ks));
        out << ',';
        if (!d1s.empty()) out << format_double(median(d1s));
        out << ',';
        if (!d2s.empty()) out << format_double(median(d2s));
        out << ',';
        if (!sup_e.empty()) out << format_double(mean(sup_e));
        out << ',';
        if (!sup_o.empty()) out << format_double(mean(sup_o));
        out << ',';
        if (report.config.timing && !walls.empty()) out << format_double(median(walls));
        out << '\n';
    }
}

}  // namespace knotfit
