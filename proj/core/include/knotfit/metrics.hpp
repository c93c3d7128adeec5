#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace knotfit {

/// Evaluation locations with the true function values and their range.
struct EvaluationGrid {
    std::vector<double> points;
    Eigen::VectorXd truth;
    double f_min = 0.0;
    double f_max = 0.0;

    static EvaluationGrid make(std::vector<double> points, Eigen::VectorXd truth);
};

/// sup over elements of v of the distance to the nearest element of u.
/// Both sets must be non-empty.
double directed_hausdorff(std::span<const double> u, std::span<const double> v);

/// Symmetric Hausdorff distance: max of the two directed distances.
double hausdorff(std::span<const double> u, std::span<const double> v);

/// Max absolute error divided by the range of the truth.  Throws when the
/// truth is constant (the normalization is undefined).
double normalized_sup_norm(const Eigen::VectorXd& model_values, const EvaluationGrid& grid);

/// Index of the entry with the smallest normalized sup norm; ties go to the
/// earlier entry, so with a descending-lambda ordering ties favor the larger
/// lambda.  Benchmark-only oracle; requires the truth.
int lambda_opt_index(const std::vector<Eigen::VectorXd>& per_lambda_values,
                     const EvaluationGrid& grid);

}  // namespace knotfit
