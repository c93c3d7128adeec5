#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace knotfit {

/**
 * Banded discrete difference operator of order q+1 on n points.
 *
 * Row i spans columns i .. i+q+1, so the matrix has n-q-1 rows and each row
 * carries q+2 entries.  Rows annihilate samples of any polynomial of degree
 * at most q on the construction points.  On an evenly spaced grid with gap h
 * the weighted operator equals h^{-(q+1)} times the plain iterated-difference
 * matrix.
 *
 * Immutable after construction; safe for concurrent reads.
 */
class DifferenceOperator {
public:
    /// Plain first-difference matrix with rows (-1, 1); n >= 2.
    static DifferenceOperator fused(int n);

    /**
     * Weighted difference operator of order q+1 for strictly increasing
     * points.  Built by the recursion
     *
     *     T^(r) = W_r * D0 * T^(r-1),   T^(0) = identity,
     *
     * where D0 takes adjacent-row differences and W_r carries the inverse
     * span weights r / (x_{i+r} - x_i).  Row i of T^(r) is then r! times the
     * r-th divided difference on x_i..x_{i+r}, which is what makes the
     * degree-q annihilation exact on uneven grids.
     */
    static DifferenceOperator trend(std::span<const double> points, int q);

    int rows() const { return static_cast<int>(band_.size()); }
    int cols() const { return cols_; }
    /// Differentiation order q+1.
    int order() const { return order_; }
    bool weighted() const { return weighted_; }
    /// Entries per row, q+2.
    int bandwidth() const { return order_ + 1; }
    /// Band entry j of row i, addressing column i + j.
    double band(int i, int j) const { return band_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& u) const;

    /// Same as apply_transpose restricted to a subset of rows.
    Eigen::VectorXd apply_transpose_subset(std::span<const int> row_indices,
                                           const Eigen::VectorXd& u) const;

    Eigen::MatrixXd dense() const;

private:
    DifferenceOperator(std::vector<std::vector<double>> band, int cols, int order,
                       bool weighted)
        : band_(std::move(band)), cols_(cols), order_(order), weighted_(weighted) {}

    std::vector<std::vector<double>> band_;  // band_[i][j] at column i + j
    int cols_;
    int order_;
    bool weighted_;
};

}  // namespace knotfit
