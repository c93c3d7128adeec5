#include "knotfit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "knotfit/parallel.hpp"

namespace knotfit {

GridDataset GridDataset::make(std::vector<double> axis1, std::vector<double> axis2,
                              Eigen::VectorXd y) {
    for (const auto* axis : {&axis1, &axis2}) {
        if (axis->size() < 2) throw std::invalid_argument("grid axes need at least two values");
        for (std::size_t i = 1; i < axis->size(); ++i) {
            if (!((*axis)[i] > (*axis)[i - 1])) {
                throw std::invalid_argument("grid axes must be strictly increasing");
            }
        }
    }
    if (y.size() != static_cast<Eigen::Index>(axis1.size() * axis2.size())) {
        throw std::invalid_argument("grid responses must have length n1*n2");
    }
    return GridDataset{std::move(axis1), std::move(axis2), std::move(y)};
}

EquivalentLambdaSet pool_equivalent(const std::vector<SlicePathSummary>& slices,
                                    int dimension, double min_gap) {
    if (slices.empty()) throw std::invalid_argument("pool_equivalent: no slices");
    EquivalentLambdaSet out;
    out.dimension = dimension;
    std::size_t s_min = std::numeric_limits<std::size_t>::max();
    for (const auto& s : slices) {
        if (s.grid.size() != s.knots_per_lambda.size()) {
            throw std::invalid_argument("pool_equivalent: slice grid/knot length mismatch");
        }
        s_min = std::min(s_min, s.grid.size());
    }
    out.s_min = static_cast<int>(s_min);
    out.tilde_lambdas.resize(s_min);
    out.pooled_knots.resize(s_min);
    for (std::size_t k = 0; k < s_min; ++k) {
        auto& lambdas = out.tilde_lambdas[k];
        std::vector<double> pool;
        lambdas.reserve(slices.size());
        for (const auto& s : slices) {
            lambdas.push_back(s.grid[k]);
            pool.insert(pool.end(), s.knots_per_lambda[k].begin(), s.knots_per_lambda[k].end());
        }
        std::sort(pool.begin(), pool.end());
        auto& knots = out.pooled_knots[k];
        for (double v : pool) {
            // duplicates and near-duplicates collapse onto the first occurrence
            if (knots.empty() || v - knots.back() > std::max(min_gap, 0.0)) {
                knots.push_back(v);
            }
        }
    }
    return out;
}

EquivalentLambdaSet per_dimension_paths(const GridDataset& data, int dim, int q,
                                        const PathConfig& config) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("dimension must be 1 or 2");
    const std::vector<double>& along = dim == 1 ? data.axis1 : data.axis2;
    const int n_along = static_cast<int>(along.size());
    const int n_slices = dim == 1 ? data.n2() : data.n1();
    if (n_along < q + 2) {
        throw std::invalid_argument("per_dimension_paths: slices shorter than q+2");
    }

    const auto ymat = data.y_matrix();
    const DifferenceOperator op = DifferenceOperator::trend(along, q);
    std::vector<SlicePathSummary> slices(static_cast<std::size_t>(n_slices));
    parallel_for(static_cast<std::size_t>(n_slices), [&](std::size_t i) {
        Eigen::VectorXd y_slice(n_along);
        for (int k = 0; k < n_along; ++k) {
            y_slice[k] = dim == 1 ? ymat(k, static_cast<Eigen::Index>(i))
                                  : ymat(static_cast<Eigen::Index>(i), k);
        }
        LassoPath path = solve_path(y_slice, op, config);
        SlicePathSummary& s = slices[i];
        s.grid = path.grid;
        s.knots_per_lambda.reserve(path.solutions.size());
        for (const auto& sol : path.solutions) {
            s.knots_per_lambda.push_back(extract_knots(sol, along).knots);
        }
    });

    const double min_gap = (along.back() - along.front()) * 1e-9;
    return pool_equivalent(slices, dim, min_gap);
}

namespace {

double log_binomial(double total, double chosen) {
    return std::lgamma(total + 1.0) - std::lgamma(chosen + 1.0) -
           std::lgamma(total - chosen + 1.0);
}

}  // namespace

TensorCellFit ebic_2d(const GridDataset& data, const AugmentedKnotVector& knots1,
                      const AugmentedKnotVector& knots2, int q) {
    const int n1 = data.n1();
    const int n2 = data.n2();
    const double n = static_cast<double>(data.n());
    const int q1 = knots1.num_basis();
    const int q2 = knots2.num_basis();
    const double model_size = static_cast<double>(q1) * static_cast<double>(q2);
    const double max_size =
        (static_cast<double>(q) + n1 + 1.0) * (static_cast<double>(q) + n2 + 1.0);

    TensorCellFit cell;
    if (model_size > n) {
        cell.skipped = true;
        cell.skip_reason = "overparameterized: Q1*Q2 exceeds the observation count";
        return cell;
    }
    if (model_size > max_size) {
        cell.skipped = true;
        cell.skip_reason = "overparameterized: Q1*Q2 exceeds the candidate space";
        return cell;
    }

    const Eigen::MatrixXd b1 = design_matrix(knots1, data.axis1);
    const Eigen::MatrixXd b2 = design_matrix(knots2, data.axis2);
    const auto ymat = data.y_matrix();

    // normal equations factor over the two axes: G1 * Gamma * G2 = B1' Y B2
    Eigen::LLT<Eigen::MatrixXd> llt1(b1.transpose() * b1);
    Eigen::LLT<Eigen::MatrixXd> llt2(b2.transpose() * b2);
    if (llt1.info() == Eigen::Success && llt2.info() == Eigen::Success) {
        const Eigen::MatrixXd c = b1.transpose() * ymat * b2;
        const Eigen::MatrixXd x = llt1.solve(c);
        cell.gamma = llt2.solve(x.transpose()).transpose();
    } else {
        // rank-deficient factor: fall back to the materialized least squares
        const double work = n * model_size;
        if (work > 5e7) {
            cell.skipped = true;
            cell.skip_reason = "rank-deficient factor on a grid too large to materialize";
            return cell;
        }
        const Eigen::MatrixXd b = kronecker_design(b1, b2);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(b);
        const Eigen::VectorXd flat = cod.solve(data.y);
        cell.gamma = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                    Eigen::RowMajor>>(flat.data(), q1, q2);
        cell.rank_warning = true;
    }

    cell.ss = (ymat - b1 * cell.gamma * b2.transpose()).squaredNorm();
    cell.ebic = cell.ss + model_size * std::log(n) + 2.0 * log_binomial(max_size, model_size);
    return cell;
}

double FittedTensorModel::predict(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dims()) {
        throw std::invalid_argument("predict: point dimension mismatch");
    }
    // contract the flattened coefficients one factor at a time, last first
    Eigen::VectorXd acc = gamma;
    for (int d = dims() - 1; d >= 0; --d) {
        const Eigen::VectorXd basis = knots[static_cast<std::size_t>(d)].basis_row(x[static_cast<std::size_t>(d)]);
        const Eigen::Index q_d = basis.size();
        const Eigen::Index blocks = acc.size() / q_d;
        Eigen::VectorXd next(blocks);
        for (Eigen::Index b = 0; b < blocks; ++b) {
            next[b] = acc.segment(b * q_d, q_d).dot(basis);
        }
        acc = std::move(next);
    }
    return acc[0];
}

Eigen::MatrixXd FittedTensorModel::gamma_matrix() const {
    if (dims() != 2) throw std::logic_error("gamma_matrix: model is not two-dimensional");
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(gamma.data(), shape[0], shape[1]);
}

Eigen::MatrixXd FittedTensorModel::predict_grid(std::span<const double> xs1,
                                                std::span<const double> xs2) const {
    if (dims() != 2) throw std::logic_error("predict_grid: model is not two-dimensional");
    const Eigen::MatrixXd b1 = design_matrix(knots[0], xs1);
    const Eigen::MatrixXd b2 = design_matrix(knots[1], xs2);
    return b1 * gamma_matrix() * b2.transpose();
}

Fit2DResult fit_2d(const GridDataset& data, const Fit2DOptions& options) {
    const int q = options.degree;
    if (q < 0) throw std::invalid_argument("fit_2d: degree must be non-negative");

    const double lo1 = options.bounds1 ? options.bounds1->first : data.axis1.front();
    const double hi1 = options.bounds1 ? options.bounds1->second : data.axis1.back();
    const double lo2 = options.bounds2 ? options.bounds2->first : data.axis2.front();
    const double hi2 = options.bounds2 ? options.bounds2->second : data.axis2.back();

    Fit2DResult result;
    result.eq1 = per_dimension_paths(data, 1, q, options.path);
    result.eq2 = per_dimension_paths(data, 2, q, options.path);

    // distinct candidate sets per dimension
    auto distinct_sets = [](const EquivalentLambdaSet& eq) {
        std::map<std::vector<double>, int> ids;
        std::vector<int> entry_to_set(eq.pooled_knots.size());
        std::vector<const std::vector<double>*> sets;
        for (std::size_t k = 0; k < eq.pooled_knots.size(); ++k) {
            auto [it, inserted] = ids.emplace(eq.pooled_knots[k], static_cast<int>(sets.size()));
            if (inserted) sets.push_back(&it->first);
            entry_to_set[k] = it->second;
        }
        return std::make_pair(entry_to_set, sets);
    };
    const auto [map1, sets1] = distinct_sets(result.eq1);
    const auto [map2, sets2] = distinct_sets(result.eq2);

    // score each distinct knot combination once
    const std::size_t pairs = sets1.size() * sets2.size();
    std::vector<Fit2DResult::DistinctFit> fits(pairs);
    parallel_for(pairs, [&](std::size_t p) {
        const std::size_t i1 = p / sets2.size();
        const std::size_t i2 = p % sets2.size();
        AugmentedKnotVector k1(*sets1[i1], q + 1, lo1, hi1);
        AugmentedKnotVector k2(*sets2[i2], q + 1, lo2, hi2);
        fits[p] = Fit2DResult::DistinctFit{*sets1[i1], *sets2[i2],
                                           ebic_2d(data, k1, k2, q)};
    });

    // deterministic scan of the full entry product
    const int s1 = result.eq1.s_min;
    const int s2 = result.eq2.s_min;
    result.cell_to_distinct.resize(static_cast<std::size_t>(s1) * static_cast<std::size_t>(s2));
    int best_k1 = -1, best_k2 = -1;
    double best_ebic = std::numeric_limits<double>::infinity();
    double best_size = std::numeric_limits<double>::infinity();
    for (int k1 = 0; k1 < s1; ++k1) {
        for (int k2 = 0; k2 < s2; ++k2) {
            const std::size_t p = static_cast<std::size_t>(map1[static_cast<std::size_t>(k1)]) * sets2.size() +
                                  static_cast<std::size_t>(map2[static_cast<std::size_t>(k2)]);
            result.cell_to_distinct[static_cast<std::size_t>(k1) * static_cast<std::size_t>(s2) +
                                    static_cast<std::size_t>(k2)] = static_cast<int>(p);
            const TensorCellFit& fit = fits[p].fit;
            if (fit.skipped) {
                ++result.skipped_cells;
                continue;
            }
            const double size = static_cast<double>(fits[p].knots1.size() + q + 1) *
                                static_cast<double>(fits[p].knots2.size() + q + 1);
            const bool better =
                fit.ebic < best_ebic ||
                (fit.ebic == best_ebic && size < best_size);
            if (better) {
                best_ebic = fit.ebic;
                best_size = size;
                best_k1 = k1;
                best_k2 = k2;
            }
        }
    }
    if (best_k1 < 0) {
        throw std::runtime_error("fit_2d: every knot combination was overparameterized");
    }

    const auto& chosen = fits[static_cast<std::size_t>(
        result.cell_to_distinct[static_cast<std::size_t>(best_k1) * static_cast<std::size_t>(s2) +
                                static_cast<std::size_t>(best_k2)])];
    FittedTensorModel model;
    model.knots = {AugmentedKnotVector(chosen.knots1, q + 1, lo1, hi1),
                   AugmentedKnotVector(chosen.knots2, q + 1, lo2, hi2)};
    model.shape = {model.knots[0].num_basis(), model.knots[1].num_basis()};
    // flatten row-major (second factor fastest)
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gr = chosen.fit.gamma;
    model.gamma = Eigen::Map<const Eigen::VectorXd>(gr.data(), gr.size());
    model.degree = q;
    model.ebic = chosen.fit.ebic;
    model.ss = chosen.fit.ss;
    model.rank_warning = chosen.fit.rank_warning;

    result.model = std::move(model);
    result.selected_entries = {best_k1, best_k2};
    result.selected_lambda1 = result.eq1.tilde_lambdas[static_cast<std::size_t>(best_k1)];
    result.selected_lambda2 = result.eq2.tilde_lambdas[static_cast<std::size_t>(best_k2)];
    result.distinct = std::move(fits);
    return result;
}

}  // namespace knotfit
