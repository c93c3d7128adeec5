#include "knotfit/fit1d.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace knotfit {

double FittedSplineModel::predict(double x) const {
    if (!knots.contains(x)) {
        std::ostringstream msg;
        msg << "prediction point " << x << " outside model domain [" << knots.lower()
            << ", " << knots.upper() << "]";
        throw std::domain_error(msg.str());
    }
    return knots.basis_row(x).dot(gamma);
}

Eigen::VectorXd FittedSplineModel::predict(std::span<const double> xs) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) out[static_cast<Eigen::Index>(i)] = predict(xs[i]);
    return out;
}

SelectedKnots extract_knots(const LassoSolution& sol, std::span<const double> points,
                            double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("knot threshold must be positive");
    const int n = static_cast<int>(points.size());
    if (sol.a.size() >= n) {
        throw std::invalid_argument("extract_knots: differentiated vector too long for points");
    }

    SelectedKnots out;
    out.lambda = sol.lambda;
    const double cut = threshold * std::max(1.0, sol.a.lpNorm<Eigen::Infinity>());

    // candidate (point index, |a|) pairs, boundary points excluded
    std::vector<std::pair<int, double>> cand;
    for (int l = 0; l < sol.a.size(); ++l) {
        if (std::abs(sol.a[l]) > cut) {
            const int p = l + 1;
            if (points[p] == points[0] || points[p] == points[static_cast<std::size_t>(n - 1)]) continue;
            cand.emplace_back(p, std::abs(sol.a[l]));
        }
    }

    const double min_gap = (points[static_cast<std::size_t>(n - 1)] - points[0]) * 1e-9;
    for (const auto& [p, w] : cand) {
        if (!out.indices.empty() &&
            points[static_cast<std::size_t>(p)] - out.knots.back() < min_gap) {
            // near-duplicate: keep the location with the stronger signal
            const int prev = out.indices.back();
            const double prev_w = std::abs(sol.a[prev - 1]);
            if (w > prev_w) {
                out.indices.back() = p;
                out.knots.back() = points[static_cast<std::size_t>(p)];
            }
            continue;
        }
        out.indices.push_back(p);
        out.knots.push_back(points[static_cast<std::size_t>(p)]);
    }
    return out;
}

FittedSplineModel fit_spline(const Eigen::VectorXd& y, std::span<const double> points,
                             const std::vector<double>& knots, int degree,
                             std::optional<std::pair<double, double>> bounds) {
    if (y.size() != static_cast<Eigen::Index>(points.size())) {
        throw std::invalid_argument("fit_spline: response and points must have equal length");
    }
    if (degree < 0) throw std::invalid_argument("fit_spline: degree must be non-negative");
    const double lo = bounds ? bounds->first : points.front();
    const double hi = bounds ? bounds->second : points.back();

    AugmentedKnotVector akv(knots, degree + 1, lo, hi);
    const Eigen::MatrixXd b = design_matrix(akv, points);

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b);
    const bool deficient = cod.rank() < b.cols();
    Eigen::VectorXd gamma = cod.solve(y);

    FittedSplineModel model{std::move(akv), std::move(gamma), degree, 0.0, 0.0, 0.0, deficient};
    model.ss = (y - b * model.gamma).squaredNorm();
    return model;
}

double ebic_score(double ss, int n, int degree, int k, int k_max) {
    if (n < 1) throw std::invalid_argument("ebic_score: n must be positive");
    if (k < 0 || k > k_max) {
        throw std::invalid_argument("ebic_score: knot count exceeds the allowed maximum");
    }
    const double p = degree + k + 1;
    const double p_max = degree + k_max + 1;
    // log C(p_max, p) through log-gamma; exact zeros when k == k_max
    const double log_binom =
        std::lgamma(p_max + 1.0) - std::lgamma(p + 1.0) - std::lgamma(p_max - p + 1.0);
    return ss + p * std::log(static_cast<double>(n)) + 2.0 * log_binom;
}

Fit1DResult fit_1d(const Eigen::VectorXd& y, std::span<const double> points,
                   const Fit1DOptions& options) {
    const int n = static_cast<int>(points.size());
    if (y.size() != n) {
        throw std::invalid_argument("fit_1d: response and points must have equal length");
    }
    const int q = options.degree;
    if (q < 0) throw std::invalid_argument("fit_1d: degree must be non-negative");
    if (n < q + 2) throw std::invalid_argument("fit_1d: need at least q+2 observations");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return points[static_cast<std::size_t>(i)] < points[static_cast<std::size_t>(j)]; });

    std::vector<double> x(static_cast<std::size_t>(n));
    Eigen::VectorXd ys(n);
    for (int i = 0; i < n; ++i) {
        x[static_cast<std::size_t>(i)] = points[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        ys[i] = y[order[static_cast<std::size_t>(i)]];
    }
    for (int i = 1; i < n; ++i) {
        if (x[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i - 1)]) {
            std::ostringstream msg;
            msg << "fit_1d: duplicate observation point " << x[static_cast<std::size_t>(i)];
            throw std::invalid_argument(msg.str());
        }
    }
    if (options.bounds) {
        if (!(options.bounds->first <= x.front() && options.bounds->second >= x.back())) {
            throw std::invalid_argument("fit_1d: bounds must enclose the observation points");
        }
    }

    const DifferenceOperator op = DifferenceOperator::trend(x, q);
    LassoPath path = solve_path(ys, op, options.path);
    const int k_max = options.k_max < 0 ? n : options.k_max;

    Fit1DResult result;
    result.per_lambda.reserve(path.solutions.size());

    // identical knot sets along the path share one least-squares fit
    std::map<std::vector<int>, int> seen;
    std::vector<FittedSplineModel> distinct;
    int best = -1;

    for (std::size_t i = 0; i < path.solutions.size(); ++i) {
        SelectedKnots sel = extract_knots(path.solutions[i], x, options.knot_threshold);

        const auto it = seen.find(sel.indices);
        int model_id;
        if (it == seen.end()) {
            FittedSplineModel m = fit_spline(ys, x, sel.knots, q, options.bounds);
            m.ebic = ebic_score(m.ss, n, q, sel.count(), k_max);
            model_id = static_cast<int>(distinct.size());
            distinct.push_back(std::move(m));
            seen.emplace(sel.indices, model_id);
        } else {
            model_id = it->second;
        }
        FittedSplineModel m = distinct[static_cast<std::size_t>(model_id)];
        m.lambda = path.grid[i];

        if (best < 0 ||
            m.ebic < result.per_lambda[static_cast<std::size_t>(best)].model.ebic) {
            best = static_cast<int>(i);
        }
        result.per_lambda.push_back(PathModelRecord{std::move(sel), std::move(m)});
    }

    result.selected_index = best;
    result.model = result.per_lambda[static_cast<std::size_t>(best)].model;
    result.path = std::move(path);
    return result;
}

}  // namespace knotfit
