#include "knotfit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace knotfit {

EvaluationGrid EvaluationGrid::make(std::vector<double> points, Eigen::VectorXd truth) {
    if (points.empty()) throw std::invalid_argument("evaluation grid must be non-empty");
    if (truth.size() != static_cast<Eigen::Index>(points.size())) {
        throw std::invalid_argument("evaluation grid: truth length mismatch");
    }
    EvaluationGrid grid{std::move(points), std::move(truth), 0.0, 0.0};
    grid.f_min = grid.truth.minCoeff();
    grid.f_max = grid.truth.maxCoeff();
    return grid;
}

double directed_hausdorff(std::span<const double> u, std::span<const double> v) {
    if (u.empty() || v.empty()) {
        throw std::invalid_argument("hausdorff distance of an empty set is undefined");
    }
    double sup = 0.0;
    for (double b : v) {
        double inf = std::numeric_limits<double>::infinity();
        for (double a : u) inf = std::min(inf, std::abs(a - b));
        sup = std::max(sup, inf);
    }
    return sup;
}

double hausdorff(std::span<const double> u, std::span<const double> v) {
    return std::max(directed_hausdorff(u, v), directed_hausdorff(v, u));
}

double normalized_sup_norm(const Eigen::VectorXd& model_values, const EvaluationGrid& grid) {
    if (model_values.size() != grid.truth.size()) {
        throw std::invalid_argument("normalized_sup_norm: length mismatch");
    }
    const double range = grid.f_max - grid.f_min;
    if (!(range > 0.0)) {
        throw std::invalid_argument("normalized_sup_norm: constant truth has no defined range");
    }
    return (model_values - grid.truth).lpNorm<Eigen::Infinity>() / range;
}

int lambda_opt_index(const std::vector<Eigen::VectorXd>& per_lambda_values,
                     const EvaluationGrid& grid) {
    if (per_lambda_values.empty()) {
        throw std::invalid_argument("lambda_opt_index: no candidates");
    }
    int best = 0;
    double best_value = normalized_sup_norm(per_lambda_values[0], grid);
    for (std::size_t i = 1; i < per_lambda_values.size(); ++i) {
        const double value = normalized_sup_norm(per_lambda_values[i], grid);
        if (value < best_value) {
            best_value = value;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace knotfit
