#pragma once

#include <Eigen/Dense>
#include <vector>

#include "knotfit/difference.hpp"

namespace knotfit {

/**
 * Minimizer of ||y - beta||^2 + lambda * ||D beta||_1 for one lambda.
 *
 * `a` is the differentiated vector D beta; `dual` is the box dual certificate
 * u with |u| <= 1, u_l = sign(a_l) on the active rows, and
 * 2(beta - y) + lambda * D^T u = 0 up to kkt_residual.
 */
struct LassoSolution {
    double lambda = 0.0;
    Eigen::VectorXd beta;
    Eigen::VectorXd a;
    Eigen::VectorXd dual;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct PathConfig {
    int grid_size = 50;
    double lambda_min_ratio = 1e-4;
    double tol = 1e-8;
    long max_iter = 100000;
};

/// Solutions along a strictly descending lambda grid, warm-started in order.
struct LassoPath {
    std::vector<double> grid;
    std::vector<LassoSolution> solutions;
    long total_iterations = 0;
};

/// Objective ||y - beta||^2 + lambda * ||D beta||_1.
double genlasso_objective(const Eigen::VectorXd& y, const DifferenceOperator& op,
                          double lambda, const Eigen::VectorXd& beta);

/**
 * Solves the penalized problem at a fixed lambda.
 *
 * Operator splitting on the constrained form (beta, z = D beta) with a
 * prefactored banded system for the beta update, followed by an exact
 * refinement on the detected support whenever its dual certificate checks
 * out.  Warm starts reuse (a, dual) of a neighbouring solution.
 *
 * When the iteration cap is hit the best iterate is returned with
 * converged = false and its actual residual; no exception is thrown.
 */
LassoSolution solve_genlasso(const Eigen::VectorXd& y, const DifferenceOperator& op,
                             double lambda, const LassoSolution* warm_start = nullptr,
                             double tol = 1e-8, long max_iter = 100000);

/**
 * Smallest lambda at which the solution's penalized term vanishes:
 * 2 * ||(D D^T)^{-1} D y||_inf.  At or above this value the solution is the
 * least-squares polynomial of degree q, so a(lambda) = 0.
 */
double compute_lambda_max(const Eigen::VectorXd& y, const DifferenceOperator& op);

/**
 * Warm-started solve over grid_size log-spaced lambdas descending from
 * lambda_max to lambda_max * lambda_min_ratio.
 */
LassoPath solve_path(const Eigen::VectorXd& y, const DifferenceOperator& op,
                     const PathConfig& config);

}  // namespace knotfit
