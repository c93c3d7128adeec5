#include "knotfit/difference.hpp"

#include <stdexcept>

namespace knotfit {

DifferenceOperator DifferenceOperator::fused(int n) {
    if (n < 2) {
        throw std::invalid_argument("fused difference requires at least two points");
    }
    std::vector<std::vector<double>> band(static_cast<std::size_t>(n - 1), {-1.0, 1.0});
    return DifferenceOperator(std::move(band), n, 1, false);
}

DifferenceOperator DifferenceOperator::trend(std::span<const double> points, int q) {
    if (q < 0) {
        throw std::invalid_argument("difference degree q must be non-negative");
    }
    const int n = static_cast<int>(points.size());
    if (n < q + 2) {
        throw std::invalid_argument("trend operator needs at least q+2 points");
    }
    for (int i = 1; i < n; ++i) {
        if (!(points[i] > points[i - 1])) {
            throw std::invalid_argument("points must be strictly increasing");
        }
    }

    // level r-1 rows span columns i .. i+r-1; differencing and weighting
    // produce the level r rows spanning i .. i+r
    std::vector<std::vector<double>> cur(static_cast<std::size_t>(n),
                                         std::vector<double>{1.0});
    for (int r = 1; r <= q + 1; ++r) {
        const int rows = n - r;
        std::vector<std::vector<double>> next(
            static_cast<std::size_t>(rows), std::vector<double>(static_cast<std::size_t>(r + 1), 0.0));
        for (int i = 0; i < rows; ++i) {
            const double w = static_cast<double>(r) / (points[i + r] - points[i]);
            for (int j = 0; j < r; ++j) {
                next[i][j] -= w * cur[i][j];
                next[i][j + 1] += w * cur[i + 1][j];
            }
        }
        cur = std::move(next);
    }
    return DifferenceOperator(std::move(cur), n, q + 1, true);
}

Eigen::VectorXd DifferenceOperator::apply(const Eigen::VectorXd& v) const {
    if (v.size() != cols_) {
        throw std::invalid_argument("difference operator: dimension mismatch");
    }
    Eigen::VectorXd out(rows());
    for (int i = 0; i < rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j <= order_; ++j) s += band_[i][j] * v[i + j];
        out[i] = s;
    }
    return out;
}

Eigen::VectorXd DifferenceOperator::apply_transpose(const Eigen::VectorXd& u) const {
    if (u.size() != rows()) {
        throw std::invalid_argument("difference operator: dimension mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
    for (int i = 0; i < rows(); ++i) {
        for (int j = 0; j <= order_; ++j) out[i + j] += band_[i][j] * u[i];
    }
    return out;
}

Eigen::VectorXd DifferenceOperator::apply_transpose_subset(
    std::span<const int> row_indices, const Eigen::VectorXd& u) const {
    if (u.size() != static_cast<Eigen::Index>(row_indices.size())) {
        throw std::invalid_argument("difference operator: dimension mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cols_);
    for (std::size_t k = 0; k < row_indices.size(); ++k) {
        const int i = row_indices[k];
        for (int j = 0; j <= order_; ++j) out[i + j] += band_[i][j] * u[static_cast<Eigen::Index>(k)];
    }
    return out;
}

Eigen::MatrixXd DifferenceOperator::dense() const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols_);
    for (int i = 0; i < rows(); ++i) {
        for (int j = 0; j <= order_; ++j) out(i, i + j) = band_[i][j];
    }
    return out;
}

}  // namespace knotfit
