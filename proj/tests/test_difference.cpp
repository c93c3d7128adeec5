#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "knotfit/difference.hpp"
#include "knotfit/rng.hpp"
#include "oracles.hpp"

using knotfit::DifferenceOperator;

namespace {

std::vector<double> even_points(int n, double h) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = i * h;
    return x;
}

/// Iterated plain difference matrix of order q+1 (the even-spacing target).
Eigen::MatrixXd iterated_fused(int n, int q) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(n, n);
    for (int r = 1; r <= q + 1; ++r) {
        const Eigen::MatrixXd d0 = DifferenceOperator::fused(n - r + 1).dense();
        d = d0 * d;
    }
    return d;
}

}  // namespace

TEST_CASE("fused difference matrix") {
    const DifferenceOperator d4 = DifferenceOperator::fused(4);
    Eigen::MatrixXd expected(3, 4);
    expected << -1, 1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1;
    CHECK(d4.dense().isApprox(expected));

    CHECK(DifferenceOperator::fused(2).dense().isApprox((Eigen::MatrixXd(1, 2) << -1, 1).finished()));
    CHECK_THROWS_AS(DifferenceOperator::fused(1), std::invalid_argument);

    Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 3.0);
    CHECK(d4.apply(c).isZero(0.0));
}

TEST_CASE("first-order trend operator uses inverse gaps") {
    const std::vector<double> pts = {0.0, 0.5, 2.0};
    const DifferenceOperator op = DifferenceOperator::trend(pts, 0);
    REQUIRE(op.rows() == 2);
    Eigen::MatrixXd expected(2, 3);
    expected << -2.0, 2.0, 0.0, 0.0, -2.0 / 3.0, 2.0 / 3.0;
    CHECK(op.dense().isApprox(expected, 1e-12));

    const auto even = even_points(6, 0.25);
    const DifferenceOperator op_even = DifferenceOperator::trend(even, 0);
    CHECK(op_even.dense().isApprox(4.0 * DifferenceOperator::fused(6).dense(), 1e-12));
}

TEST_CASE("trend operator validation") {
    CHECK_THROWS_AS(DifferenceOperator::trend(std::vector<double>{0.0, 0.0, 1.0}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(DifferenceOperator::trend(std::vector<double>{0.0, 1.0, 2.0}, 2),
                    std::invalid_argument);  // n < q + 2
}

TEST_CASE("trend operator annihilates polynomials up to the penalty degree") {
    knotfit::Rng rng(55);
    for (int rep = 0; rep < 30; ++rep) {
        const int q = rng.uniform_int(3);
        const int n = q + 2 + rng.uniform_int(30);
        const std::vector<double> pts = testutil::random_increasing(rng, n, 0.0, 1.0, 1e-4);
        const DifferenceOperator op = DifferenceOperator::trend(pts, q);
        REQUIRE(op.rows() == n - q - 1);

        double op_norm = 0.0;
        const Eigen::MatrixXd dense = op.dense();
        for (int i = 0; i < dense.rows(); ++i) {
            op_norm = std::max(op_norm, dense.row(i).cwiseAbs().sum());
        }

        for (int deg = 0; deg <= q; ++deg) {
            Eigen::VectorXd samples(n);
            for (int i = 0; i < n; ++i) samples[i] = std::pow(pts[static_cast<std::size_t>(i)], deg);
            CHECK(op.apply(samples).lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, op_norm));
        }
        // rows sum to zero for every order
        for (int i = 0; i < dense.rows(); ++i) CHECK(std::abs(dense.row(i).sum()) <= 1e-10 * op_norm);
    }
}

TEST_CASE("second-degree operator kills x^2 on an arbitrary grid") {
    const std::vector<double> pts = {0.0, 1.0, 2.0, 10.0};
    const DifferenceOperator op = DifferenceOperator::trend(pts, 2);
    Eigen::VectorXd sq(4);
    for (int i = 0; i < 4; ++i) sq[i] = pts[static_cast<std::size_t>(i)] * pts[static_cast<std::size_t>(i)];
    CHECK(op.apply(sq).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("even spacing reduces to the scaled iterated difference") {
    knotfit::Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const int q = rng.uniform_int(3);
        const int n = q + 3 + rng.uniform_int(12);
        const double h = 0.01 + rng.uniform();
        const DifferenceOperator op = DifferenceOperator::trend(even_points(n, h), q);
        const Eigen::MatrixXd target = std::pow(h, -(q + 1)) * iterated_fused(n, q);
        CHECK((op.dense() - target).cwiseAbs().maxCoeff() <=
              1e-12 * target.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("banded application matches the dense matrix") {
    knotfit::Rng rng(99);
    const std::vector<double> pts = testutil::random_increasing(rng, 20, 0.0, 1.0, 1e-3);
    const DifferenceOperator op = DifferenceOperator::trend(pts, 2);
    Eigen::VectorXd v(20), u(op.rows());
    for (int i = 0; i < 20; ++i) v[i] = rng.normal();
    for (int i = 0; i < op.rows(); ++i) u[i] = rng.normal();

    CHECK((op.apply(v) - op.dense() * v).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((op.apply_transpose(u) - op.dense().transpose() * u).lpNorm<Eigen::Infinity>() <= 1e-12);

    const std::vector<int> subset = {0, 3, 4, 11};
    Eigen::VectorXd us(4);
    for (int i = 0; i < 4; ++i) us[i] = u[subset[static_cast<std::size_t>(i)]];
    Eigen::MatrixXd dsub(4, 20);
    for (int i = 0; i < 4; ++i) dsub.row(i) = op.dense().row(subset[static_cast<std::size_t>(i)]);
    CHECK((op.apply_transpose_subset(subset, us) - dsub.transpose() * us)
              .lpNorm<Eigen::Infinity>() <= 1e-12);
}
