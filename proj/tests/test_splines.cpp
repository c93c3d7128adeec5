#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "knotfit/rng.hpp"
#include "knotfit/splines.hpp"
#include "oracles.hpp"

using knotfit::AugmentedKnotVector;
using knotfit::design_matrix;
using knotfit::kronecker_design;

namespace {

std::vector<double> even_grid(int n, double lo = 0.0, double hi = 1.0) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

}  // namespace

TEST_CASE("augmented knot sequence repeats the bounds order times") {
    AugmentedKnotVector akv({0.1, 0.27, 0.745}, 3, 0.0, 1.0);
    const std::vector<double> expected = {0, 0, 0, 0.1, 0.27, 0.745, 1, 1, 1};
    REQUIRE(akv.augmented() == expected);
    CHECK(akv.num_basis() == 6);

    AugmentedKnotVector trivial({}, 1, 0.0, 1.0);
    REQUIRE(trivial.augmented() == std::vector<double>{0.0, 1.0});

    AugmentedKnotVector single({0.5}, 2, 0.0, 1.0);
    REQUIRE(single.augmented() == std::vector<double>{0, 0, 0.5, 1, 1});
}

TEST_CASE("knot vector construction rejects bad input with distinct messages") {
    CHECK_THROWS_WITH_AS(AugmentedKnotVector({0.3, 0.2}, 2, 0.0, 1.0),
                         doctest::Contains("strictly increasing"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(AugmentedKnotVector({0.0}, 2, 0.0, 1.0),
                         doctest::Contains("strictly inside"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(AugmentedKnotVector({1.5}, 2, 0.0, 1.0),
                         doctest::Contains("strictly inside"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(AugmentedKnotVector({0.5}, 0, 0.0, 1.0),
                         doctest::Contains("order"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(AugmentedKnotVector({}, 1, 1.0, 0.0),
                         doctest::Contains("bound"), std::invalid_argument);
    // duplicate interior knots are a strict-increase violation
    CHECK_THROWS_AS(AugmentedKnotVector({0.5, 0.5}, 2, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("first-order basis is the interval indicator") {
    AugmentedKnotVector akv({}, 1, 0.0, 1.0);
    CHECK(akv.basis(0, 1, 0.3) == 1.0);
    CHECK(akv.basis(0, 1, 1.0) == 1.0);  // closed right end
    CHECK_THROWS_AS(akv.basis(0, 1, 1.2), std::domain_error);
    CHECK_THROWS_AS(akv.basis(1, 1, 0.3), std::out_of_range);
}

TEST_CASE("clamped quadratic basis interpolates the endpoints") {
    AugmentedKnotVector akv({0.1, 0.27, 0.745}, 3, 0.0, 1.0);
    CHECK(akv.basis(0, 3, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 1; j < 6; ++j) CHECK(akv.basis(j, 3, 0.0) == doctest::Approx(0.0));
    CHECK(akv.basis(5, 3, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int j = 0; j < 5; ++j) CHECK(akv.basis(j, 3, 1.0) == doctest::Approx(0.0));

    for (double x : even_grid(101)) {
        double sum = 0.0;
        for (int i = 0; i < 6; ++i) sum += akv.basis(i, 3, x);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("design matrix shapes and partition of unity") {
    AugmentedKnotVector constant({}, 1, 0.0, 1.0);
    const auto pts5 = even_grid(5);
    Eigen::MatrixXd b = design_matrix(constant, pts5);
    REQUIRE(b.rows() == 5);
    REQUIRE(b.cols() == 1);
    CHECK(b.isApprox(Eigen::MatrixXd::Ones(5, 1)));

    AugmentedKnotVector f1_knots({0.1, 0.27, 0.745}, 3, 0.0, 1.0);
    const auto grid = even_grid(201);
    Eigen::MatrixXd design = design_matrix(f1_knots, grid);
    REQUIRE(design.rows() == 201);
    REQUIRE(design.cols() == 6);  // q + K + 1 with q=2, K=3
    for (int r = 0; r < design.rows(); ++r) {
        CHECK(std::abs(design.row(r).sum() - 1.0) <= 1e-12);
        CHECK(design.row(r).minCoeff() >= 0.0);
        CHECK(design.row(r).maxCoeff() <= 1.0);
    }

    std::vector<double> outside = {1.5};
    CHECK_THROWS_AS(design_matrix(f1_knots, outside), std::domain_error);
}

TEST_CASE("kronecker design matches the grid observation ordering") {
    knotfit::Rng rng(7);
    Eigen::MatrixXd b1(3, 2), b2(4, 3);
    for (int i = 0; i < b1.size(); ++i) b1.data()[i] = rng.uniform();
    for (int i = 0; i < b2.size(); ++i) b2.data()[i] = rng.uniform();

    Eigen::MatrixXd k = kronecker_design(b1, b2);
    REQUIRE(k.rows() == 12);
    REQUIRE(k.cols() == 6);
    // row (r1, r2), column (c1, c2), second index fastest
    for (int r1 = 0; r1 < 3; ++r1)
        for (int r2 = 0; r2 < 4; ++r2)
            for (int c1 = 0; c1 < 2; ++c1)
                for (int c2 = 0; c2 < 3; ++c2)
                    CHECK(k(r1 * 4 + r2, c1 * 3 + c2) ==
                          doctest::Approx(b1(r1, c1) * b2(r2, c2)).epsilon(1e-15));

    Eigen::MatrixXd kid = kronecker_design(Eigen::MatrixXd::Identity(2, 2), b2);
    CHECK(kid.block(0, 0, 4, 3).isApprox(b2));
    CHECK(kid.block(4, 3, 4, 3).isApprox(b2));
    CHECK(kid.block(0, 3, 4, 3).isZero());
    CHECK(kid.block(4, 0, 4, 3).isZero());
}

TEST_CASE("kronecker rows of two partitions of unity sum to one") {
    AugmentedKnotVector a({0.4}, 2, 0.0, 1.0), b({0.3, 0.7}, 3, 0.0, 1.0);
    const auto g1 = even_grid(6), g2 = even_grid(5);
    Eigen::MatrixXd k = kronecker_design(design_matrix(a, g1), design_matrix(b, g2));
    for (int r = 0; r < k.rows(); ++r) CHECK(std::abs(k.row(r).sum() - 1.0) <= 1e-12);
}

TEST_CASE("basis properties on random knot vectors") {
    knotfit::Rng rng(42);
    for (int rep = 0; rep < 25; ++rep) {
        const int order = 1 + rng.uniform_int(4);
        const int n_knots = rng.uniform_int(6);
        const std::vector<double> interior =
            testutil::random_increasing(rng, n_knots, 0.05, 0.95, 0.01);
        AugmentedKnotVector akv(interior, order, 0.0, 1.0);
        const auto& tau = akv.augmented();

        for (int t = 0; t < 40; ++t) {
            const double x = t == 0 ? 0.0 : (t == 1 ? 1.0 : rng.uniform());
            const Eigen::VectorXd row = akv.basis_row(x);
            CHECK(std::abs(row.sum() - 1.0) <= 1e-12);  // partition of unity
            for (int i = 0; i < akv.num_basis(); ++i) {
                CHECK(row[i] >= 0.0);
                CHECK(row[i] == doctest::Approx(akv.basis(i, order, x)).epsilon(1e-13));
                // local support
                if (x < tau[static_cast<std::size_t>(i)] ||
                    x > tau[static_cast<std::size_t>(i + order)]) {
                    CHECK(row[i] == 0.0);
                }
            }
        }
    }
}

TEST_CASE("recursion agrees with the explicit piecewise expansion up to order 3") {
    knotfit::Rng rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const int order = 1 + rng.uniform_int(3);
        const int n_knots = rng.uniform_int(5);
        const std::vector<double> interior =
            testutil::random_increasing(rng, n_knots, 0.05, 0.95, 0.02);
        AugmentedKnotVector akv(interior, order, 0.0, 1.0);

        for (int t = 0; t < 100; ++t) {
            const double x = t == 0 ? 0.0 : (t == 1 ? 1.0 : rng.uniform());
            for (int i = 0; i < akv.num_basis(); ++i) {
                const double expected =
                    testutil::piecewise_bspline(akv.augmented(), 1.0, i, order, x);
                CHECK(std::abs(akv.basis(i, order, x) - expected) <= 1e-12);
            }
        }
    }
}
