#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "knotfit/genlasso.hpp"
#include "knotfit/tensor.hpp"

namespace knotfit {

/// General d-dimensional observations, not assumed to lie on a grid.
struct ScatteredDataset {
    Eigen::MatrixXd points;  // n x d
    Eigen::VectorXd y;

    static ScatteredDataset make(Eigen::MatrixXd points, Eigen::VectorXd y);

    int n() const { return static_cast<int>(points.rows()); }
    int d() const { return static_cast<int>(points.cols()); }
};

/// Default cluster count floor(n / 25), at least 1: keeps every cluster
/// large enough for a one-dimensional path.
int default_cluster_count(int n);

/**
 * Lloyd iteration with greedy farthest-point seeding from the given seed.
 * Deterministic; clusters emptied by an assignment step are re-seeded from
 * the point farthest from its current center.
 */
std::vector<int> kmeans_labels(const Eigen::MatrixXd& points, int k,
                               std::uint64_t seed, int max_iter = 100);

/// Within-cluster sum of squares of the best split of sorted values into
/// 1..c_max contiguous clusters (exact dynamic program).
std::vector<double> wss_curve_1d(const std::vector<double>& sorted_values, int c_max);

/// Medians of the optimal c-cluster split of sorted values.
std::vector<double> cluster_medians_1d(const std::vector<double>& sorted_values, int c);

/// Cluster count at the kink of a non-increasing wss curve: the interior
/// index maximizing the discrete second difference, ties toward fewer
/// clusters.  Curves shorter than 3 give 1.
int elbow_index(std::span<const double> wss);

/// Diagnostics of the per-dimension knot search: every pooled raw knot
/// location plus the cluster-median representatives.
struct KnotClusterSummary {
    int dimension = 0;  // 0-based coordinate index
    std::vector<double> raw_knots;
    int cluster_count = 0;
    std::vector<double> representatives;
    std::vector<double> wss_curve;
    int clusters_skipped = 0;
};

/// Knot candidates for one coordinate: clustered medians per equivalent
/// penalization level, plus the pooled summary across all levels.
struct DimensionCandidates {
    KnotClusterSummary summary;
    std::vector<std::vector<double>> per_entry_knots;
    std::vector<std::vector<double>> tilde_lambdas;
};

DimensionCandidates scattered_dimension_candidates(
    const ScatteredDataset& data, int dim, int q, const PathConfig& config,
    std::uint64_t seed, std::optional<std::pair<double, double>> bounds = {},
    double knot_threshold = 1e-6, int max_knot_clusters = 15);

/**
 * Knot search along one coordinate: observations are clustered on the other
 * coordinates, the one-dimensional path runs inside every cluster, selections
 * are pooled per equivalent penalization level, and the pooled locations are
 * clustered with median representatives.
 */
KnotClusterSummary knots_per_dimension(const ScatteredDataset& data, int dim, int q,
                                       const PathConfig& config, std::uint64_t seed);

struct FitNdOptions {
    int degree = 2;
    PathConfig path;
    double knot_threshold = 1e-6;
    std::uint64_t seed = 0;
    int max_knot_clusters = 15;
    /// Per-dimension domain; empty means the data range of each coordinate.
    std::vector<std::pair<double, double>> bounds;
};

struct FitNdResult {
    FittedTensorModel model;
    std::vector<DimensionCandidates> candidates;
    std::vector<int> selected_entries;  // chosen equivalent level per dimension
    int evaluated_cells = 0;
    int skipped_cells = 0;
};

/**
 * Scattered-data pipeline: per-dimension candidate knot sets for every
 * equivalent penalization level, criterion scoring over the cross product of
 * levels with point-wise tensor design rows, and the criterion-minimizing
 * fit.  Deterministic for a fixed (data, seed, config).
 */
FitNdResult fit_nd(const ScatteredDataset& data, const FitNdOptions& options = {});

}  // namespace knotfit
