#include "knotfit/genlasso.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace knotfit {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

SpMat operator_gram_ata(const DifferenceOperator& op) {
    // D^T D, n x n, bandwidth q+1
    const int n = op.cols();
    const int b = op.bandwidth();
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(op.rows()) * b * b);
    for (int i = 0; i < op.rows(); ++i) {
        for (int j1 = 0; j1 < b; ++j1) {
            for (int j2 = 0; j2 < b; ++j2) {
                trips.emplace_back(i + j1, i + j2, op.band(i, j1) * op.band(i, j2));
            }
        }
    }
    SpMat g(n, n);
    g.setFromTriplets(trips.begin(), trips.end());
    return g;
}

// Gram of a subset of rows of D, optionally scaled per row: (S D_r)(S D_r)^T.
SpMat subset_gram_aat(const DifferenceOperator& op, const std::vector<int>& rows,
                      const std::vector<double>& scale) {
    const int m = static_cast<int>(rows.size());
    const int b = op.bandwidth();
    std::vector<Triplet> trips;
    for (int k1 = 0; k1 < m; ++k1) {
        // rows further apart than the bandwidth cannot overlap
        for (int k2 = k1; k2 < m && rows[k2] - rows[k1] <= b - 1; ++k2) {
            const int off = rows[k2] - rows[k1];
            double s = 0.0;
            for (int j = off; j < b; ++j) s += op.band(rows[k1], j) * op.band(rows[k2], j - off);
            s *= scale[static_cast<std::size_t>(k1)] * scale[static_cast<std::size_t>(k2)];
            trips.emplace_back(k1, k2, s);
            if (k2 != k1) trips.emplace_back(k2, k1, s);
        }
    }
    SpMat g(m, m);
    g.setFromTriplets(trips.begin(), trips.end());
    return g;
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Max violation of the stationarity, box, and sign conditions at (beta, v).
/// Entries of a below the floating-point resolution of applying that row of
/// the operator are indistinguishable from zero and carry no sign condition.
double kkt_violation(const Eigen::VectorXd& y, const DifferenceOperator& op,
                     double lambda, const Eigen::VectorXd& beta,
                     const Eigen::VectorXd& a, const Eigen::VectorXd& v) {
    const Eigen::VectorXd g = 2.0 * (beta - y) + lambda * op.apply_transpose(v);
    double resid = g.lpNorm<Eigen::Infinity>();
    const double beta_scale =
        std::max(1.0, beta.lpNorm<Eigen::Infinity>());
    constexpr double kRowEps = 64.0 * std::numeric_limits<double>::epsilon();
    for (int l = 0; l < v.size(); ++l) {
        resid = std::max(resid, lambda * std::max(std::abs(v[l]) - 1.0, 0.0));
        double row_abs = 0.0;
        for (int j = 0; j < op.bandwidth(); ++j) row_abs += std::abs(op.band(l, j));
        if (std::abs(a[l]) > kRowEps * row_abs * beta_scale) {
            // violated only when a_l is clearly nonzero AND v_l is off sign
            resid = std::max(resid, std::min(std::abs(a[l]),
                                             lambda * std::abs(v[l] - sgn(a[l]))));
        }
    }
    return resid;
}

/// Exact solve at a fixed support: rows in `signs` with nonzero sign keep it,
/// all other rows of D beta are forced to zero.  Fills (beta, a, v); v on the
/// zeroed rows carries the unclipped constraint multipliers.
bool constrained_solve(const Eigen::VectorXd& y, const DifferenceOperator& op,
                       double lambda, const std::vector<double>& signs,
                       Eigen::VectorXd& beta, Eigen::VectorXd& a, Eigen::VectorXd& v) {
    const int m = op.rows();
    std::vector<int> support, comp;
    for (int l = 0; l < m; ++l) {
        (signs[static_cast<std::size_t>(l)] != 0.0 ? support : comp).push_back(l);
    }

    Eigen::VectorXd t = y;
    if (!support.empty()) {
        Eigen::VectorXd s(static_cast<Eigen::Index>(support.size()));
        for (std::size_t k = 0; k < support.size(); ++k) {
            s[static_cast<Eigen::Index>(k)] = signs[static_cast<std::size_t>(support[k])];
        }
        t -= 0.5 * lambda * op.apply_transpose_subset(support, s);
    }

    v.resize(m);
    if (!comp.empty()) {
        // equilibrate rows before forming the constraint gram
        std::vector<double> scale(comp.size());
        for (std::size_t k = 0; k < comp.size(); ++k) {
            double norm2 = 0.0;
            for (int j = 0; j < op.bandwidth(); ++j) {
                const double e = op.band(comp[k], j);
                norm2 += e * e;
            }
            scale[k] = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
        }
        const SpMat g = subset_gram_aat(op, comp, scale);
        Eigen::SimplicialLDLT<SpMat> ldlt(g);
        if (ldlt.info() != Eigen::Success) return false;

        const Eigen::VectorXd dct_full = op.apply(t);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(comp.size()));
        for (std::size_t k = 0; k < comp.size(); ++k) {
            rhs[static_cast<Eigen::Index>(k)] = 2.0 * scale[k] * dct_full[comp[k]];
        }
        Eigen::VectorXd w = ldlt.solve(rhs);
        w += ldlt.solve(rhs - g * w);  // one refinement pass

        Eigen::VectorXd mu(static_cast<Eigen::Index>(comp.size()));
        for (std::size_t k = 0; k < comp.size(); ++k) {
            mu[static_cast<Eigen::Index>(k)] = scale[k] * w[static_cast<Eigen::Index>(k)];
        }
        beta = t - 0.5 * op.apply_transpose_subset(comp, mu);
        for (std::size_t k = 0; k < comp.size(); ++k) {
            v[comp[k]] = mu[static_cast<Eigen::Index>(k)] / lambda;
        }
    } else {
        beta = t;
    }
    for (int l : support) v[l] = signs[static_cast<std::size_t>(l)];
    a = op.apply(beta);
    return true;
}

/**
 * Active-set refinement from a support guess.  Each pass solves the
 * equality-constrained problem exactly and re-derives the support from the
 * combined primal-dual score v + a/lambda (rows with |score| > 1 are active
 * with that sign); a fixed point of this map satisfies the optimality
 * conditions exactly, and the seeded guess from the splitting iteration
 * usually reaches one within a few passes.
 */
bool try_polish(const Eigen::VectorXd& y, const DifferenceOperator& op, double lambda,
                const Eigen::VectorXd& z, double accept_tol, LassoSolution& out) {
    const int m = op.rows();
    std::vector<double> signs(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) signs[static_cast<std::size_t>(l)] = sgn(z[l]);

    Eigen::VectorXd beta, a, v;
    constexpr int kMaxPasses = 100;
    for (int pass = 0; pass < kMaxPasses; ++pass) {
        if (!constrained_solve(y, op, lambda, signs, beta, a, v)) return false;

        bool changed = false;
        for (int l = 0; l < m; ++l) {
            const double score = v[l] + a[l] / lambda;
            const double next = std::abs(score) > 1.0 ? sgn(score) : 0.0;
            if (next != signs[static_cast<std::size_t>(l)]) {
                signs[static_cast<std::size_t>(l)] = next;
                changed = true;
            }
        }
        if (!changed) break;
        if (pass == kMaxPasses - 1) return false;
    }

    const double resid = kkt_violation(y, op, lambda, beta, a, v);
    if (!(resid <= accept_tol)) return false;

    for (int l = 0; l < m; ++l) v[l] = std::clamp(v[l], -1.0, 1.0);
    out.beta = std::move(beta);
    out.a = std::move(a);
    out.dual = std::move(v);
    out.kkt_residual = resid;
    out.converged = true;
    return true;
}

}  // namespace

double genlasso_objective(const Eigen::VectorXd& y, const DifferenceOperator& op,
                          double lambda, const Eigen::VectorXd& beta) {
    return (y - beta).squaredNorm() + lambda * op.apply(beta).lpNorm<1>();
}

LassoSolution solve_genlasso(const Eigen::VectorXd& y, const DifferenceOperator& op,
                             double lambda, const LassoSolution* warm_start,
                             double tol, long max_iter) {
    const int n = op.cols();
    const int m = op.rows();
    if (y.size() != n) {
        throw std::invalid_argument("solve_genlasso: response length does not match operator");
    }
    if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

    LassoSolution sol;
    sol.lambda = lambda;

    if (lambda == 0.0) {
        sol.beta = y;
        sol.a = op.apply(y);
        sol.dual = Eigen::VectorXd::Zero(m);
        for (int l = 0; l < m; ++l) sol.dual[l] = sgn(sol.a[l]);
        sol.kkt_residual = 0.0;
        sol.converged = true;
        return sol;
    }

    const SpMat ata = operator_gram_ata(op);
    SpMat eye(n, n);
    eye.setIdentity();

    double rho = lambda;
    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.analyzePattern(ata);
    auto refactor = [&]() {
        SpMat system = SpMat(2.0 * eye) + rho * ata;
        ldlt.factorize(system);
        if (ldlt.info() != Eigen::Success) {
            throw std::runtime_error("solve_genlasso: failed to factor the quadratic system");
        }
    };
    refactor();

    Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    if (warm_start != nullptr && warm_start->a.size() == m) {
        z = warm_start->a;
        if (warm_start->dual.size() == m) {
            u = warm_start->dual * (lambda / rho);
        }
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd dbeta = Eigen::VectorXd::Zero(m);
    long next_polish = 10;
    long polish_step = 10;

    long k = 0;
    while (k < max_iter) {
        ++k;
        beta = ldlt.solve(2.0 * y + rho * op.apply_transpose(z - u));
        dbeta = op.apply(beta);
        Eigen::VectorXd z_old = std::move(z);
        z.resize(m);
        const double shrink = lambda / rho;
        for (int l = 0; l < m; ++l) {
            const double w = dbeta[l] + u[l];
            z[l] = sgn(w) * std::max(std::abs(w) - shrink, 0.0);
        }
        u += dbeta - z;

        const double r_primal = (dbeta - z).lpNorm<Eigen::Infinity>();
        const double s_dual = rho * op.apply_transpose(z - z_old).lpNorm<Eigen::Infinity>();
        const bool near = r_primal <= 1e3 * tol && s_dual <= 1e3 * tol;

        if (k >= next_polish || near) {
            LassoSolution polished;
            polished.lambda = lambda;
            if (try_polish(y, op, lambda, z, tol, polished)) {
                polished.iterations = static_cast<int>(k);
                return polished;
            }
            polish_step = std::min(polish_step * 2, 500L);
            next_polish = k + polish_step;
        }

        if (r_primal <= tol && s_dual <= tol) {
            Eigen::VectorXd v = (rho / lambda) * u;
            for (int l = 0; l < m; ++l) v[l] = std::clamp(v[l], -1.0, 1.0);
            const double resid = kkt_violation(y, op, lambda, beta, dbeta, v);
            if (resid <= tol) {
                sol.beta = beta;
                sol.a = dbeta;
                sol.dual = std::move(v);
                sol.kkt_residual = resid;
                sol.iterations = static_cast<int>(k);
                sol.converged = true;
                return sol;
            }
        }

        if (k % 25 == 0) {
            if (r_primal > 10.0 * s_dual) {
                rho *= 2.0;
                u *= 0.5;
                refactor();
            } else if (s_dual > 10.0 * r_primal) {
                rho *= 0.5;
                u *= 2.0;
                refactor();
            }
        }
    }

    // iteration cap: report the best iterate with its actual residual
    Eigen::VectorXd v = (rho / lambda) * u;
    for (int l = 0; l < m; ++l) v[l] = std::clamp(v[l], -1.0, 1.0);
    sol.beta = beta;
    sol.a = dbeta;
    sol.dual = std::move(v);
    sol.kkt_residual = kkt_violation(y, op, lambda, sol.beta, sol.a, sol.dual);
    sol.iterations = static_cast<int>(k);
    sol.converged = false;
    return sol;
}

double compute_lambda_max(const Eigen::VectorXd& y, const DifferenceOperator& op) {
    if (y.size() != op.cols()) {
        throw std::invalid_argument("compute_lambda_max: response length does not match operator");
    }
    const int m = op.rows();
    std::vector<int> all(static_cast<std::size_t>(m));
    std::vector<double> scale(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        all[static_cast<std::size_t>(i)] = i;
        double norm2 = 0.0;
        for (int j = 0; j < op.bandwidth(); ++j) {
            const double e = op.band(i, j);
            norm2 += e * e;
        }
        scale[static_cast<std::size_t>(i)] = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 1.0;
    }
    const SpMat g = subset_gram_aat(op, all, scale);
    Eigen::SimplicialLDLT<SpMat> ldlt(g);
    if (ldlt.info() != Eigen::Success) {
        throw std::runtime_error("compute_lambda_max: operator gram matrix is rank deficient");
    }
    const Eigen::VectorXd dy = op.apply(y);
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = scale[static_cast<std::size_t>(i)] * dy[i];
    Eigen::VectorXd w = ldlt.solve(rhs);
    w += ldlt.solve(rhs - g * w);
    double lmax = 0.0;
    for (int i = 0; i < m; ++i) {
        lmax = std::max(lmax, std::abs(scale[static_cast<std::size_t>(i)] * w[i]));
    }
    return 2.0 * lmax;
}

LassoPath solve_path(const Eigen::VectorXd& y, const DifferenceOperator& op,
                     const PathConfig& config) {
    if (config.grid_size < 2) {
        throw std::invalid_argument("solve_path: grid size must be at least 2");
    }
    if (!(config.lambda_min_ratio > 0.0 && config.lambda_min_ratio < 1.0)) {
        throw std::invalid_argument("solve_path: lambda_min_ratio must lie in (0, 1)");
    }

    const double floor_scale = 1e-12 * std::max(1.0, y.lpNorm<Eigen::Infinity>());
    const double lmax = std::max(compute_lambda_max(y, op), floor_scale);

    LassoPath path;
    path.grid.resize(static_cast<std::size_t>(config.grid_size));
    const double log_ratio = std::log(config.lambda_min_ratio);
    for (int i = 0; i < config.grid_size; ++i) {
        path.grid[static_cast<std::size_t>(i)] =
            lmax * std::exp(log_ratio * static_cast<double>(i) /
                            static_cast<double>(config.grid_size - 1));
    }

    path.solutions.reserve(path.grid.size());
    const LassoSolution* warm = nullptr;
    for (double lambda : path.grid) {
        path.solutions.push_back(
            solve_genlasso(y, op, lambda, warm, config.tol, config.max_iter));
        warm = &path.solutions.back();
        path.total_iterations += path.solutions.back().iterations;
    }
    return path;
}

}  // namespace knotfit
