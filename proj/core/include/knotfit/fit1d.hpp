#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "knotfit/genlasso.hpp"
#include "knotfit/splines.hpp"

namespace knotfit {

/// Knot candidates read off one path solution: observation points x_{l+1}
/// where the differentiated vector a_l is (relatively) nonzero.
struct SelectedKnots {
    double lambda = 0.0;
    std::vector<int> indices;   // 0-based indices into the sorted points
    std::vector<double> knots;  // strictly increasing interior values
    int count() const { return static_cast<int>(knots.size()); }
};

/// Penalized spline regression selected at one lambda.
struct FittedSplineModel {
    AugmentedKnotVector knots;
    Eigen::VectorXd gamma;
    int degree = 0;  // q; basis order is q+1
    double lambda = 0.0;
    double ebic = 0.0;
    double ss = 0.0;
    bool rank_warning = false;

    /// Value of the fitted spline; throws std::domain_error outside the bounds.
    double predict(double x) const;
    Eigen::VectorXd predict(std::span<const double> xs) const;
};

struct Fit1DOptions {
    int degree = 2;  // q
    PathConfig path;
    /// Spline domain; defaults to the data range.
    std::optional<std::pair<double, double>> bounds;
    /// Maximum selectable knot count in the information criterion; -1 means n.
    int k_max = -1;
    /// Relative zero test for entries of a(lambda).
    double knot_threshold = 1e-6;
};

/// Per-lambda record kept so oracle metrics can be evaluated along the path.
struct PathModelRecord {
    SelectedKnots selected;
    FittedSplineModel model;
};

struct Fit1DResult {
    FittedSplineModel model;  // information-criterion minimizer
    LassoPath path;
    std::vector<PathModelRecord> per_lambda;
    int selected_index = 0;
};

/**
 * Nonzero pattern of a(lambda) into knot locations (Eq.-style zero test with
 * a relative threshold).  Knots equal to the first or last point are dropped
 * (the clamped boundary already covers them); knots closer than
 * (range * 1e-9) are merged keeping the larger |a|.
 */
SelectedKnots extract_knots(const LassoSolution& sol, std::span<const double> points,
                            double threshold = 1e-6);

/// Least-squares spline fit on fixed knots; rank-deficient designs fall back
/// to the minimum-norm solution and set rank_warning.
FittedSplineModel fit_spline(const Eigen::VectorXd& y, std::span<const double> points,
                             const std::vector<double>& knots, int degree,
                             std::optional<std::pair<double, double>> bounds = {});

/// Information criterion: ss + (q+K+1) log n + 2 log C(q+K_max+1, q+K+1).
double ebic_score(double ss, int n, int degree, int k, int k_max);

/**
 * Full one-dimensional pipeline: path solve, knot extraction, per-lambda
 * spline fits, criterion scoring, and the criterion-minimizing model (ties
 * resolved toward the larger lambda).  Inputs are sorted internally;
 * duplicate x values are rejected.
 */
Fit1DResult fit_1d(const Eigen::VectorXd& y, std::span<const double> points,
                   const Fit1DOptions& options = {});

}  // namespace knotfit
