#include "knotfit/splines.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace knotfit {

AugmentedKnotVector::AugmentedKnotVector(std::vector<double> interior_knots,
                                         int order, double lower, double upper)
    : interior_(std::move(interior_knots)), order_(order), lower_(lower), upper_(upper) {
    if (order_ < 1) {
        throw std::invalid_argument("spline order must be at least 1");
    }
    if (!(lower_ < upper_)) {
        throw std::invalid_argument("lower bound must be strictly below upper bound");
    }
    for (std::size_t j = 0; j < interior_.size(); ++j) {
        if (!(interior_[j] > lower_ && interior_[j] < upper_)) {
            std::ostringstream msg;
            msg << "interior knot " << interior_[j] << " must lie strictly inside ("
                << lower_ << ", " << upper_ << ")";
            throw std::invalid_argument(msg.str());
        }
        if (j > 0 && !(interior_[j] > interior_[j - 1])) {
            throw std::invalid_argument("interior knots must be strictly increasing");
        }
    }
    tau_.reserve(interior_.size() + 2 * static_cast<std::size_t>(order_));
    tau_.insert(tau_.end(), static_cast<std::size_t>(order_), lower_);
    tau_.insert(tau_.end(), interior_.begin(), interior_.end());
    tau_.insert(tau_.end(), static_cast<std::size_t>(order_), upper_);
}

double AugmentedKnotVector::basis(int i, int m, double x) const {
    if (m < 1 || m > order_) {
        throw std::out_of_range("basis order must lie in [1, M]");
    }
    const int count = static_cast<int>(tau_.size()) - m;
    if (i < 0 || i >= count) {
        throw std::out_of_range("basis index out of range");
    }
    if (!contains(x)) {
        std::ostringstream msg;
        msg << "evaluation point " << x << " outside domain [" << lower_ << ", "
            << upper_ << "]";
        throw std::domain_error(msg.str());
    }
    return basis_unchecked(i, m, x);
}

double AugmentedKnotVector::basis_unchecked(int i, int m, double x) const {
    if (m == 1) {
        if (tau_[i] <= x && x < tau_[i + 1]) return 1.0;
        // close the right end: the last non-degenerate interval owns x = upper
        if (x == upper_ && tau_[i] < tau_[i + 1] && tau_[i + 1] == upper_) return 1.0;
        return 0.0;
    }
    double value = 0.0;
    const double dl = tau_[i + m - 1] - tau_[i];
    if (dl > 0.0) {
        value += (x - tau_[i]) / dl * basis_unchecked(i, m - 1, x);
    }
    const double dr = tau_[i + m] - tau_[i + 1];
    if (dr > 0.0) {
        value += (tau_[i + m] - x) / dr * basis_unchecked(i + 1, m - 1, x);
    }
    return value;
}

Eigen::VectorXd AugmentedKnotVector::basis_row(double x) const {
    if (!contains(x)) {
        std::ostringstream msg;
        msg << "evaluation point " << x << " outside domain [" << lower_ << ", "
            << upper_ << "]";
        throw std::domain_error(msg.str());
    }
    const int L = static_cast<int>(tau_.size());
    // one sweep per order: b[i] holds B_{i,m}(x)
    std::vector<double> b(static_cast<std::size_t>(L - 1), 0.0);
    for (int i = 0; i < L - 1; ++i) {
        if (tau_[i] <= x && x < tau_[i + 1]) {
            b[i] = 1.0;
        } else if (x == upper_ && tau_[i] < tau_[i + 1] && tau_[i + 1] == upper_) {
            b[i] = 1.0;
        }
    }
    for (int m = 2; m <= order_; ++m) {
        for (int i = 0; i + m < L; ++i) {
            double value = 0.0;
            const double dl = tau_[i + m - 1] - tau_[i];
            if (dl > 0.0) value += (x - tau_[i]) / dl * b[i];
            const double dr = tau_[i + m] - tau_[i + 1];
            if (dr > 0.0) value += (tau_[i + m] - x) / dr * b[i + 1];
            b[i] = value;
        }
    }
    Eigen::VectorXd row(num_basis());
    for (int i = 0; i < num_basis(); ++i) row[i] = b[i];
    return row;
}

Eigen::MatrixXd design_matrix(const AugmentedKnotVector& knots,
                              std::span<const double> points) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), knots.num_basis());
    for (std::size_t r = 0; r < points.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = knots.basis_row(points[r]).transpose();
    }
    return out;
}

Eigen::MatrixXd kronecker_design(const Eigen::MatrixXd& b1, const Eigen::MatrixXd& b2) {
    Eigen::MatrixXd out(b1.rows() * b2.rows(), b1.cols() * b2.cols());
    for (Eigen::Index r1 = 0; r1 < b1.rows(); ++r1) {
        for (Eigen::Index c1 = 0; c1 < b1.cols(); ++c1) {
            out.block(r1 * b2.rows(), c1 * b2.cols(), b2.rows(), b2.cols()) =
                b1(r1, c1) * b2;
        }
    }
    return out;
}

}  // namespace knotfit
