#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "knotfit/fit1d.hpp"
#include "knotfit/genlasso.hpp"
#include "knotfit/splines.hpp"

namespace knotfit {

/// Responses on a full cartesian grid, flattened with the second coordinate
/// varying fastest: y[k * n2 + l] observes (axis1[k], axis2[l]).
struct GridDataset {
    std::vector<double> axis1;
    std::vector<double> axis2;
    Eigen::VectorXd y;

    static GridDataset make(std::vector<double> axis1, std::vector<double> axis2,
                            Eigen::VectorXd y);

    int n1() const { return static_cast<int>(axis1.size()); }
    int n2() const { return static_cast<int>(axis2.size()); }
    int n() const { return n1() * n2(); }

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    y_matrix() const {
        return {y.data(), n1(), n2()};
    }
};

/// Per-slice path output reduced to what the pooling rule needs.
struct SlicePathSummary {
    std::vector<double> grid;  // descending lambdas
    std::vector<std::vector<double>> knots_per_lambda;
};

/**
 * Aligned per-slice penalization levels: every slice grid is truncated to the
 * shortest one, entry k collects the k-th strongest lambda of every slice,
 * and the matching knot sets are pooled (sorted union, near-duplicates within
 * min_gap merged keeping the first).
 */
struct EquivalentLambdaSet {
    int dimension = 1;
    int s_min = 0;
    std::vector<std::vector<double>> tilde_lambdas;
    std::vector<std::vector<double>> pooled_knots;
};

EquivalentLambdaSet pool_equivalent(const std::vector<SlicePathSummary>& slices,
                                    int dimension, double min_gap);

/// Runs the one-dimensional path along `dim` (1 or 2) for every fixed value
/// of the other axis and pools the per-slice selections.
EquivalentLambdaSet per_dimension_paths(const GridDataset& data, int dim, int q,
                                        const PathConfig& config);

/// One scored knot combination.  Combinations whose coefficient count would
/// exceed the observation count are skipped rather than fitted.
struct TensorCellFit {
    bool skipped = false;
    std::string skip_reason;
    double ebic = 0.0;
    double ss = 0.0;
    Eigen::MatrixXd gamma;  // Q1 x Q2
    bool rank_warning = false;
};

TensorCellFit ebic_2d(const GridDataset& data, const AugmentedKnotVector& knots1,
                      const AugmentedKnotVector& knots2, int q);

/// Tensor-product spline with one knot vector per factor; coefficients are
/// flattened with the last factor index varying fastest.
struct FittedTensorModel {
    std::vector<AugmentedKnotVector> knots;
    Eigen::VectorXd gamma;
    std::vector<int> shape;
    int degree = 0;
    double ebic = 0.0;
    double ss = 0.0;
    bool rank_warning = false;

    int dims() const { return static_cast<int>(knots.size()); }
    double predict(std::span<const double> x) const;
    /// d == 2 only: coefficients as a Q1 x Q2 matrix.
    Eigen::MatrixXd gamma_matrix() const;
    /// d == 2 only: fitted values on a cartesian evaluation grid.
    Eigen::MatrixXd predict_grid(std::span<const double> xs1,
                                 std::span<const double> xs2) const;
};

struct Fit2DResult {
    FittedTensorModel model;
    std::pair<int, int> selected_entries{0, 0};
    std::vector<double> selected_lambda1;
    std::vector<double> selected_lambda2;
    EquivalentLambdaSet eq1, eq2;

    /// Distinct knot combinations actually fitted (entry pairs collapse onto
    /// these); kept so oracle metrics can scan the whole product grid.
    struct DistinctFit {
        std::vector<double> knots1, knots2;
        TensorCellFit fit;
    };
    std::vector<DistinctFit> distinct;
    /// distinct-fit id per (entry1, entry2) cell, row-major over entry2.
    std::vector<int> cell_to_distinct;
    int skipped_cells = 0;
};

struct Fit2DOptions {
    int degree = 2;
    PathConfig path;
    double knot_threshold = 1e-6;
    std::optional<std::pair<double, double>> bounds1;
    std::optional<std::pair<double, double>> bounds2;
};

/**
 * Two-dimensional pipeline: per-dimension paths, pooled knot candidates per
 * equivalent penalization level, criterion scoring over the full product of
 * levels (cached by knot combination), and the minimizing tensor fit.  Ties
 * go to the smaller coefficient count, then the stronger penalization.
 */
Fit2DResult fit_2d(const GridDataset& data, const Fit2DOptions& options = {});

}  // namespace knotfit
