#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace knotfit {

/**
 * Clamped knot sequence for a B-spline basis of order M (degree M-1).
 *
 * The augmented sequence repeats the domain bounds M times on each side of
 * the strictly increasing interior knots, so the basis interpolates the
 * endpoints.  With K interior knots the basis holds exactly K + M functions
 * of order M, and they form a partition of unity on [lower, upper].
 *
 * Immutable after construction; safe for concurrent reads.
 */
class AugmentedKnotVector {
public:
    AugmentedKnotVector(std::vector<double> interior_knots, int order,
                        double lower, double upper);

    /// Trivial knot-free basis of order 1 on [0, 1].
    AugmentedKnotVector() : AugmentedKnotVector({}, 1, 0.0, 1.0) {}

    int order() const { return order_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    int num_interior() const { return static_cast<int>(interior_.size()); }
    /// Number of order-M basis functions, K + M.
    int num_basis() const { return num_interior() + order_; }

    const std::vector<double>& interior() const { return interior_; }
    /// Full augmented sequence of length K + 2M.
    const std::vector<double>& augmented() const { return tau_; }

    /**
     * Value of the i-th basis function of order m at x (0-based i).
     *
     * First-order functions are half-open interval indicators; higher orders
     * follow the two-term recursion with zero contributions where a knot
     * difference vanishes.  The last non-degenerate interval is treated as
     * closed at x = upper so the basis still sums to one on the right edge.
     */
    double basis(int i, int m, double x) const;

    /// All order-M basis values at x, as a dense row of length num_basis().
    Eigen::VectorXd basis_row(double x) const;

    bool contains(double x) const { return x >= lower_ && x <= upper_; }

private:
    double basis_unchecked(int i, int m, double x) const;

    std::vector<double> interior_;
    std::vector<double> tau_;
    int order_;
    double lower_;
    double upper_;
};

/// n x (K+M) matrix of order-M basis values at the given points.
/// Throws std::domain_error if a point lies outside [lower, upper].
Eigen::MatrixXd design_matrix(const AugmentedKnotVector& knots,
                              std::span<const double> points);

/**
 * Kronecker product b1 (x) b2 of two design matrices.
 *
 * Row (r1, r2) of the result, with r2 varying fastest, holds the products of
 * row r1 of b1 with row r2 of b2; likewise for the columns.  This matches the
 * row ordering of grid observations where the second coordinate varies
 * fastest.
 */
Eigen::MatrixXd kronecker_design(const Eigen::MatrixXd& b1,
                                 const Eigen::MatrixXd& b2);

}  // namespace knotfit
