#include "knotfit/scattered.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "knotfit/parallel.hpp"
#include "knotfit/rng.hpp"

namespace knotfit {

ScatteredDataset ScatteredDataset::make(Eigen::MatrixXd points, Eigen::VectorXd y) {
    if (points.rows() != y.size()) {
        throw std::invalid_argument("scattered dataset: points/response length mismatch");
    }
    if (points.cols() < 2) {
        throw std::invalid_argument("scattered dataset: need at least two coordinates");
    }
    if (points.rows() < 25) {
        throw std::invalid_argument("scattered dataset: need at least 25 observations");
    }
    std::vector<int> order(static_cast<std::size_t>(points.rows()));
    std::iota(order.begin(), order.end(), 0);
    const auto row_less = [&](int a, int b) {
        for (int c = 0; c < points.cols(); ++c) {
            if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!row_less(order[i - 1], order[i]) && !row_less(order[i], order[i - 1])) {
            throw std::invalid_argument("scattered dataset: duplicate observation point");
        }
    }
    return ScatteredDataset{std::move(points), std::move(y)};
}

int default_cluster_count(int n) { return std::max(1, n / 25); }

std::vector<int> kmeans_labels(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                               int max_iter) {
    const int n = static_cast<int>(points.rows());
    if (k < 1 || k > n) throw std::invalid_argument("kmeans: k must lie in [1, n]");

    Rng rng(seed);
    Eigen::MatrixXd centers(k, points.cols());
    centers.row(0) = points.row(rng.uniform_int(n));
    Eigen::VectorXd min_dist =
        (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        int far = 0;
        min_dist.maxCoeff(&far);
        centers.row(c) = points.row(far);
        min_dist = min_dist.cwiseMin(
            (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd dist_to_center(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            dist_to_center[i] = best_d;
            if (labels[static_cast<std::size_t>(i)] != best) {
                labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
            counts[labels[static_cast<std::size_t>(i)]] += 1;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                centers.row(c) = sums.row(c) / counts[c];
            } else {
                // re-seed an emptied cluster from the worst-served point
                int far = 0;
                dist_to_center.maxCoeff(&far);
                centers.row(c) = points.row(far);
                dist_to_center[far] = 0.0;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
    }
    return labels;
}

std::vector<double> wss_curve_1d(const std::vector<double>& v, int c_max) {
    const int m = static_cast<int>(v.size());
    if (m == 0 || c_max < 1) return {};
    c_max = std::min(c_max, m);

    std::vector<double> s1(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> s2(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        s1[static_cast<std::size_t>(i) + 1] = s1[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)];
        s2[static_cast<std::size_t>(i) + 1] =
            s2[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    const auto cost = [&](int j, int i) {  // inclusive segment [j, i]
        const double len = static_cast<double>(i - j + 1);
        const double sum = s1[static_cast<std::size_t>(i) + 1] - s1[static_cast<std::size_t>(j)];
        const double sq = s2[static_cast<std::size_t>(i) + 1] - s2[static_cast<std::size_t>(j)];
        return std::max(sq - sum * sum / len, 0.0);
    };

    // dp[c][i]: best split of v[0..i] into c clusters
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(c_max) + 1,
                                        std::vector<double>(static_cast<std::size_t>(m),
                                                            std::numeric_limits<double>::infinity()));
    for (int i = 0; i < m; ++i) dp[1][static_cast<std::size_t>(i)] = cost(0, i);
    for (int c = 2; c <= c_max; ++c) {
        for (int i = c - 1; i < m; ++i) {
            for (int j = c - 1; j <= i; ++j) {
                const double value = dp[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(j - 1)] + cost(j, i);
                if (value < dp[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]) {
                    dp[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = value;
                }
            }
        }
    }
    std::vector<double> out(static_cast<std::size_t>(c_max));
    for (int c = 1; c <= c_max; ++c) out[static_cast<std::size_t>(c - 1)] = dp[static_cast<std::size_t>(c)][static_cast<std::size_t>(m - 1)];
    return out;
}

std::vector<double> cluster_medians_1d(const std::vector<double>& v, int c) {
    const int m = static_cast<int>(v.size());
    if (m == 0) return {};
    c = std::min(std::max(c, 1), m);

    std::vector<double> s1(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<double> s2(static_cast<std::size_t>(m) + 1, 0.0);
    for (int i = 0; i < m; ++i) {
        s1[static_cast<std::size_t>(i) + 1] = s1[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)];
        s2[static_cast<std::size_t>(i) + 1] =
            s2[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    const auto cost = [&](int j, int i) {
        const double len = static_cast<double>(i - j + 1);
        const double sum = s1[static_cast<std::size_t>(i) + 1] - s1[static_cast<std::size_t>(j)];
        const double sq = s2[static_cast<std::size_t>(i) + 1] - s2[static_cast<std::size_t>(j)];
        return std::max(sq - sum * sum / len, 0.0);
    };

    std::vector<std::vector<double>> dp(static_cast<std::size_t>(c) + 1,
                                        std::vector<double>(static_cast<std::size_t>(m),
                                                            std::numeric_limits<double>::infinity()));
    std::vector<std::vector<int>> split(static_cast<std::size_t>(c) + 1,
                                        std::vector<int>(static_cast<std::size_t>(m), 0));
    for (int i = 0; i < m; ++i) dp[1][static_cast<std::size_t>(i)] = cost(0, i);
    for (int cc = 2; cc <= c; ++cc) {
        for (int i = cc - 1; i < m; ++i) {
            for (int j = cc - 1; j <= i; ++j) {
                const double value = dp[static_cast<std::size_t>(cc - 1)][static_cast<std::size_t>(j - 1)] + cost(j, i);
                if (value < dp[static_cast<std::size_t>(cc)][static_cast<std::size_t>(i)]) {
                    dp[static_cast<std::size_t>(cc)][static_cast<std::size_t>(i)] = value;
                    split[static_cast<std::size_t>(cc)][static_cast<std::size_t>(i)] = j;
                }
            }
        }
    }

    std::vector<double> medians;
    int end = m - 1;
    for (int cc = c; cc >= 1; --cc) {
        const int start = cc == 1 ? 0 : split[static_cast<std::size_t>(cc)][static_cast<std::size_t>(end)];
        const int len = end - start + 1;
        const int mid = start + len / 2;
        medians.push_back(len % 2 == 1 ? v[static_cast<std::size_t>(mid)]
                                       : 0.5 * (v[static_cast<std::size_t>(mid - 1)] + v[static_cast<std::size_t>(mid)]));
        end = start - 1;
    }
    std::reverse(medians.begin(), medians.end());
    return medians;
}

int elbow_index(std::span<const double> wss) {
    const int len = static_cast<int>(wss.size());
    if (len < 3) return 1;
    int best = 2;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (int c = 2; c <= len - 1; ++c) {
        const double curv = wss[static_cast<std::size_t>(c - 2)] - 2.0 * wss[static_cast<std::size_t>(c - 1)] +
                            wss[static_cast<std::size_t>(c)];
        if (curv > best_curv) {
            best_curv = curv;
            best = c;
        }
    }
    return best;
}

namespace {

/// Cluster sorted raw knot locations and return the elbow-count medians.
std::vector<double> cluster_representatives(const std::vector<double>& sorted_raw,
                                            int max_clusters,
                                            std::vector<double>* wss_out,
                                            int* count_out) {
    if (sorted_raw.empty()) {
        if (wss_out) wss_out->clear();
        if (count_out) *count_out = 0;
        return {};
    }
    const int c_max = std::min<int>(max_clusters, static_cast<int>(sorted_raw.size()));
    const std::vector<double> wss = wss_curve_1d(sorted_raw, c_max);
    const int c = elbow_index(wss);
    if (wss_out) *wss_out = wss;
    if (count_out) *count_out = c;
    return cluster_medians_1d(sorted_raw, c);
}

}  // namespace

DimensionCandidates scattered_dimension_candidates(
    const ScatteredDataset& data, int dim, int q, const PathConfig& config,
    std::uint64_t seed, std::optional<std::pair<double, double>> bounds,
    double knot_threshold, int max_knot_clusters) {
    const int n = data.n();
    const int d = data.d();
    if (dim < 0 || dim >= d) throw std::invalid_argument("dimension index out of range");

    // cluster on every coordinate except `dim`
    Eigen::MatrixXd features(n, d - 1);
    int col = 0;
    for (int c = 0; c < d; ++c) {
        if (c == dim) continue;
        features.col(col++) = data.points.col(c);
    }
    const int k = std::min(default_cluster_count(n), n);
    const std::vector<int> labels =
        kmeans_labels(features, k, derive_seed(seed, static_cast<std::uint64_t>(dim)));

    struct ClusterSeries {
        std::vector<double> x;
        Eigen::VectorXd y;
    };
    std::vector<ClusterSeries> series;
    int skipped = 0;
    for (int c = 0; c < k; ++c) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < n; ++i) {
            if (labels[static_cast<std::size_t>(i)] == c) pts.emplace_back(data.points(i, dim), data.y[i]);
        }
        std::sort(pts.begin(), pts.end());
        // duplicate coordinates collapse onto their mean response
        std::vector<double> xs;
        std::vector<double> ys;
        std::size_t i = 0;
        while (i < pts.size()) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < pts.size() && pts[j].first == pts[i].first) sum += pts[j++].second;
            xs.push_back(pts[i].first);
            ys.push_back(sum / static_cast<double>(j - i));
            i = j;
        }
        if (static_cast<int>(xs.size()) < q + 2) {
            ++skipped;
            continue;
        }
        ClusterSeries s;
        s.x = std::move(xs);
        s.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
        series.push_back(std::move(s));
    }
    if (series.empty()) {
        throw std::runtime_error("scattered knot search: every cluster is too small along this dimension");
    }

    std::vector<SlicePathSummary> slices(series.size());
    parallel_for(series.size(), [&](std::size_t i) {
        const DifferenceOperator op = DifferenceOperator::trend(series[i].x, q);
        LassoPath path = solve_path(series[i].y, op, config);
        slices[i].grid = path.grid;
        slices[i].knots_per_lambda.reserve(path.solutions.size());
        for (const auto& sol : path.solutions) {
            slices[i].knots_per_lambda.push_back(
                extract_knots(sol, series[i].x, knot_threshold).knots);
        }
    });

    std::size_t s_min = std::numeric_limits<std::size_t>::max();
    for (const auto& s : slices) s_min = std::min(s_min, s.grid.size());

    const double lo = bounds ? bounds->first : data.points.col(dim).minCoeff();
    const double hi = bounds ? bounds->second : data.points.col(dim).maxCoeff();
    const double min_gap = (hi - lo) * 1e-9;

    DimensionCandidates out;
    out.per_entry_knots.resize(s_min);
    out.tilde_lambdas.resize(s_min);
    std::vector<double> raw_all;
    for (std::size_t kth = 0; kth < s_min; ++kth) {
        std::vector<double> pooled;
        for (const auto& s : slices) {
            out.tilde_lambdas[kth].push_back(s.grid[kth]);
            pooled.insert(pooled.end(), s.knots_per_lambda[kth].begin(),
                          s.knots_per_lambda[kth].end());
        }
        std::sort(pooled.begin(), pooled.end());
        raw_all.insert(raw_all.end(), pooled.begin(), pooled.end());

        std::vector<double> reps =
            cluster_representatives(pooled, max_knot_clusters, nullptr, nullptr);
        // representatives must stay strictly inside the domain and separated
        std::vector<double> cleaned;
        for (double r : reps) {
            if (!(r > lo && r < hi)) continue;
            if (!cleaned.empty() && r - cleaned.back() <= min_gap) continue;
            cleaned.push_back(r);
        }
        out.per_entry_knots[kth] = std::move(cleaned);
    }

    std::sort(raw_all.begin(), raw_all.end());
    out.summary.dimension = dim;
    out.summary.clusters_skipped = skipped;
    out.summary.raw_knots = raw_all;
    std::vector<double> reps = cluster_representatives(
        raw_all, max_knot_clusters, &out.summary.wss_curve, &out.summary.cluster_count);
    for (double r : reps) {
        if (!(r > lo && r < hi)) continue;
        if (!out.summary.representatives.empty() &&
            r - out.summary.representatives.back() <= min_gap) {
            continue;
        }
        out.summary.representatives.push_back(r);
    }
    return out;
}

KnotClusterSummary knots_per_dimension(const ScatteredDataset& data, int dim, int q,
                                       const PathConfig& config, std::uint64_t seed) {
    return scattered_dimension_candidates(data, dim, q, config, seed).summary;
}

FitNdResult fit_nd(const ScatteredDataset& data, const FitNdOptions& options) {
    const int d = data.d();
    const int n = data.n();
    const int q = options.degree;
    if (q < 0) throw std::invalid_argument("fit_nd: degree must be non-negative");
    if (!options.bounds.empty() && static_cast<int>(options.bounds.size()) != d) {
        throw std::invalid_argument("fit_nd: bounds must cover every dimension");
    }

    std::vector<std::pair<double, double>> bounds(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        bounds[static_cast<std::size_t>(j)] =
            options.bounds.empty()
                ? std::make_pair(data.points.col(j).minCoeff(), data.points.col(j).maxCoeff())
                : options.bounds[static_cast<std::size_t>(j)];
    }

    FitNdResult result;
    result.candidates.reserve(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        result.candidates.push_back(scattered_dimension_candidates(
            data, j, q, options.path, options.seed, bounds[static_cast<std::size_t>(j)],
            options.knot_threshold, options.max_knot_clusters));
    }

    // distinct candidate sets per dimension, in first-appearance (strongest
    // penalization) order
    struct DimSets {
        std::vector<int> entry_to_set;
        std::vector<std::vector<double>> sets;
    };
    std::vector<DimSets> dim_sets(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        std::map<std::vector<double>, int> ids;
        auto& ds = dim_sets[static_cast<std::size_t>(j)];
        for (const auto& ks : result.candidates[static_cast<std::size_t>(j)].per_entry_knots) {
            auto [it, inserted] = ids.emplace(ks, static_cast<int>(ds.sets.size()));
            if (inserted) ds.sets.push_back(ks);
            ds.entry_to_set.push_back(it->second);
        }
    }

    // per-dimension design matrices, one per distinct set
    std::vector<std::vector<Eigen::MatrixXd>> designs(static_cast<std::size_t>(d));
    std::vector<std::vector<AugmentedKnotVector>> akvs(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
        std::vector<double> coords(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = data.points(i, j);
        for (const auto& ks : dim_sets[static_cast<std::size_t>(j)].sets) {
            AugmentedKnotVector akv(ks, q + 1, bounds[static_cast<std::size_t>(j)].first,
                                    bounds[static_cast<std::size_t>(j)].second);
            designs[static_cast<std::size_t>(j)].push_back(design_matrix(akv, coords));
            akvs[static_cast<std::size_t>(j)].push_back(std::move(akv));
        }
    }

    double a_total = 1.0;
    for (int j = 0; j < d; ++j) {
        std::vector<double> coords(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) coords[static_cast<std::size_t>(i)] = data.points(i, j);
        std::sort(coords.begin(), coords.end());
        const auto distinct = std::unique(coords.begin(), coords.end()) - coords.begin();
        a_total *= static_cast<double>(q) + static_cast<double>(distinct) + 1.0;
    }

    // score every distinct combination once
    std::vector<std::size_t> set_counts(static_cast<std::size_t>(d));
    std::size_t combos = 1;
    for (int j = 0; j < d; ++j) {
        set_counts[static_cast<std::size_t>(j)] = dim_sets[static_cast<std::size_t>(j)].sets.size();
        combos *= set_counts[static_cast<std::size_t>(j)];
    }

    struct ComboFit {
        bool skipped = true;
        double ebic = 0.0;
        double ss = 0.0;
        Eigen::VectorXd gamma;
        bool rank_warning = false;
    };
    std::vector<ComboFit> fits(combos);
    parallel_for(combos, [&](std::size_t p) {
        std::vector<int> idx(static_cast<std::size_t>(d));
        std::size_t rem = p;
        for (int j = d - 1; j >= 0; --j) {
            idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % set_counts[static_cast<std::size_t>(j)]);
            rem /= set_counts[static_cast<std::size_t>(j)];
        }
        double model_size = 1.0;
        for (int j = 0; j < d; ++j) {
            model_size *= static_cast<double>(
                designs[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])].cols());
        }
        if (model_size > static_cast<double>(n) || model_size > a_total) return;

        const int p_total = static_cast<int>(model_size);
        Eigen::MatrixXd b(n, p_total);
        for (int i = 0; i < n; ++i) {
            // row-wise tensor product, last dimension fastest
            Eigen::VectorXd acc =
                designs[0][static_cast<std::size_t>(idx[0])].row(i).transpose();
            for (int j = 1; j < d; ++j) {
                const auto& row =
                    designs[static_cast<std::size_t>(j)][static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])].row(i);
                Eigen::VectorXd next(acc.size() * row.size());
                for (Eigen::Index a1 = 0; a1 < acc.size(); ++a1) {
                    next.segment(a1 * row.size(), row.size()) = acc[a1] * row.transpose();
                }
                acc = std::move(next);
            }
            b.row(i) = acc.transpose();
        }

        ComboFit& fit = fits[p];
        Eigen::LLT<Eigen::MatrixXd> llt(b.transpose() * b);
        if (llt.info() == Eigen::Success) {
            fit.gamma = llt.solve(b.transpose() * data.y);
        } else {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b);
            fit.gamma = cod.solve(data.y);
            fit.rank_warning = true;
        }
        fit.ss = (data.y - b * fit.gamma).squaredNorm();
        const double log_binom = std::lgamma(a_total + 1.0) - std::lgamma(model_size + 1.0) -
                                 std::lgamma(a_total - model_size + 1.0);
        fit.ebic = fit.ss + model_size * std::log(static_cast<double>(n)) + 2.0 * log_binom;
        fit.skipped = false;
    });

    // deterministic scan of the full entry product (lexicographic, strongest
    // penalization first)
    std::vector<std::size_t> entry_counts(static_cast<std::size_t>(d));
    std::size_t cells = 1;
    for (int j = 0; j < d; ++j) {
        entry_counts[static_cast<std::size_t>(j)] =
            result.candidates[static_cast<std::size_t>(j)].per_entry_knots.size();
        cells *= entry_counts[static_cast<std::size_t>(j)];
    }
    if (cells == 0) throw std::runtime_error("fit_nd: no candidate knot sets");

    std::vector<int> best_entries;
    std::size_t best_combo = 0;
    double best_ebic = std::numeric_limits<double>::infinity();
    double best_size = std::numeric_limits<double>::infinity();
    std::vector<int> entry_idx(static_cast<std::size_t>(d), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rem = cell;
        for (int j = d - 1; j >= 0; --j) {
            entry_idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % entry_counts[static_cast<std::size_t>(j)]);
            rem /= entry_counts[static_cast<std::size_t>(j)];
        }
        std::size_t combo = 0;
        double size = 1.0;
        for (int j = 0; j < d; ++j) {
            const int set_id = dim_sets[static_cast<std::size_t>(j)]
                                   .entry_to_set[static_cast<std::size_t>(entry_idx[static_cast<std::size_t>(j)])];
            combo = combo * set_counts[static_cast<std::size_t>(j)] + static_cast<std::size_t>(set_id);
            size *= static_cast<double>(
                dim_sets[static_cast<std::size_t>(j)].sets[static_cast<std::size_t>(set_id)].size() +
                static_cast<std::size_t>(q) + 1);
        }
        const ComboFit& fit = fits[combo];
        if (fit.skipped) {
            ++result.skipped_cells;
            continue;
        }
        ++result.evaluated_cells;
        const bool better = fit.ebic < best_ebic || (fit.ebic == best_ebic && size < best_size);
        if (better) {
            best_ebic = fit.ebic;
            best_size = size;
            best_entries = entry_idx;
            best_combo = combo;
        }
    }
    if (best_entries.empty()) {
        throw std::runtime_error("fit_nd: every knot combination was overparameterized");
    }

    FittedTensorModel model;
    model.degree = q;
    std::size_t rem = best_combo;
    std::vector<int> set_idx(static_cast<std::size_t>(d));
    for (int j = d - 1; j >= 0; --j) {
        set_idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % set_counts[static_cast<std::size_t>(j)]);
        rem /= set_counts[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < d; ++j) {
        model.knots.push_back(akvs[static_cast<std::size_t>(j)][static_cast<std::size_t>(set_idx[static_cast<std::size_t>(j)])]);
        model.shape.push_back(model.knots.back().num_basis());
    }
    model.gamma = fits[best_combo].gamma;
    model.ebic = fits[best_combo].ebic;
    model.ss = fits[best_combo].ss;
    model.rank_warning = fits[best_combo].rank_warning;

    result.model = std::move(model);
    result.selected_entries = best_entries;
    return result;
}

}  // namespace knotfit
