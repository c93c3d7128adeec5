#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace testutil {

namespace {

/// Index j of the interval [tau_j, tau_{j+1}) holding x, closing the last
/// non-degenerate interval at x == upper; -1 when x sits in no interval.
int locate_interval(const std::vector<double>& tau, double upper, double x) {
    for (int j = 0; j + 1 < static_cast<int>(tau.size()); ++j) {
        if (tau[static_cast<std::size_t>(j)] <= x && x < tau[static_cast<std::size_t>(j) + 1]) return j;
        if (x == upper && tau[static_cast<std::size_t>(j) + 1] == upper &&
            tau[static_cast<std::size_t>(j)] < tau[static_cast<std::size_t>(j) + 1]) {
            return j;
        }
    }
    return -1;
}

}  // namespace

double piecewise_bspline(const std::vector<double>& tau, double upper, int i, int m,
                         double x) {
    if (m < 1 || m > 3) throw std::invalid_argument("piecewise oracle supports orders 1..3");
    const int j = locate_interval(tau, upper, x);
    if (j < 0) return 0.0;
    const auto t = [&](int k) { return tau[static_cast<std::size_t>(k)]; };

    if (m == 1) {
        return j == i ? 1.0 : 0.0;
    }
    if (m == 2) {
        if (j == i) return (x - t(i)) / (t(i + 1) - t(i));
        if (j == i + 1) return (t(i + 2) - x) / (t(i + 2) - t(i + 1));
        return 0.0;
    }
    // m == 3
    if (j == i) {
        return (x - t(i)) * (x - t(i)) / ((t(i + 2) - t(i)) * (t(i + 1) - t(i)));
    }
    if (j == i + 1) {
        return (x - t(i)) * (t(i + 2) - x) / ((t(i + 2) - t(i)) * (t(i + 2) - t(i + 1))) +
               (t(i + 3) - x) * (x - t(i + 1)) /
                   ((t(i + 3) - t(i + 1)) * (t(i + 2) - t(i + 1)));
    }
    if (j == i + 2) {
        return (t(i + 3) - x) * (t(i + 3) - x) /
               ((t(i + 3) - t(i + 1)) * (t(i + 3) - t(i + 2)));
    }
    return 0.0;
}

BruteLasso brute_force_genlasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& d,
                                double lambda) {
    const int m = static_cast<int>(d.rows());
    if (m > 12) throw std::invalid_argument("brute force oracle limited to 12 penalty rows");
    const double scale = std::max(1.0, y.lpNorm<Eigen::Infinity>());

    BruteLasso best;
    best.objective = std::numeric_limits<double>::infinity();

    std::vector<int> sign(static_cast<std::size_t>(m), -1);
    long total = 1;
    for (int i = 0; i < m; ++i) total *= 3;

    for (long code = 0; code < total; ++code) {
        long rem = code;
        for (int i = 0; i < m; ++i) {
            sign[static_cast<std::size_t>(i)] = static_cast<int>(rem % 3) - 1;
            rem /= 3;
        }

        std::vector<int> zero_rows, active_rows;
        for (int i = 0; i < m; ++i) {
            (sign[static_cast<std::size_t>(i)] == 0 ? zero_rows : active_rows).push_back(i);
        }

        // minimize ||y - b||^2 + lambda * s' D_a b  subject to D_0 b = 0
        Eigen::VectorXd t = y;
        for (int i : active_rows) {
            t -= 0.5 * lambda * sign[static_cast<std::size_t>(i)] * d.row(i).transpose();
        }
        Eigen::VectorXd beta;
        if (!zero_rows.empty()) {
            Eigen::MatrixXd d0(static_cast<Eigen::Index>(zero_rows.size()), d.cols());
            for (std::size_t r = 0; r < zero_rows.size(); ++r) d0.row(static_cast<Eigen::Index>(r)) = d.row(zero_rows[r]);
            const Eigen::MatrixXd gram = d0 * d0.transpose();
            const Eigen::VectorXd mu = gram.ldlt().solve(2.0 * d0 * t);
            beta = t - 0.5 * d0.transpose() * mu;
        } else {
            beta = t;
        }

        // the candidate only counts if the assumed signs hold at its optimum
        const Eigen::VectorXd db = d * beta;
        bool consistent = true;
        for (int i = 0; i < m && consistent; ++i) {
            const double v = db[i];
            if (sign[static_cast<std::size_t>(i)] == 0) {
                consistent = std::abs(v) <= 1e-8 * scale;
            } else {
                consistent = v * sign[static_cast<std::size_t>(i)] >= -1e-10 * scale;
            }
        }
        if (!consistent) continue;

        const double objective = (y - beta).squaredNorm() + lambda * db.lpNorm<1>();
        if (objective < best.objective) {
            best.objective = objective;
            best.beta = beta;
        }
    }
    return best;
}

std::vector<double> random_increasing(knotfit::Rng& rng, int n, double lo, double hi,
                                      double min_gap) {
    std::vector<double> pts;
    while (static_cast<int>(pts.size()) < n) {
        const double v = rng.uniform(lo, hi);
        bool ok = true;
        for (double p : pts) {
            if (std::abs(p - v) < min_gap || p == v) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back(v);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

}  // namespace testutil
