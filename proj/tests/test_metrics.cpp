#include <doctest.h>

#include <vector>

#include "knotfit/metrics.hpp"
#include "knotfit/rng.hpp"

using knotfit::directed_hausdorff;
using knotfit::EvaluationGrid;
using knotfit::hausdorff;
using knotfit::lambda_opt_index;
using knotfit::normalized_sup_norm;

TEST_CASE("directed hausdorff distances") {
    const std::vector<double> knots = {0.1, 0.27, 0.745};
    CHECK(directed_hausdorff(knots, knots) == 0.0);

    const std::vector<double> u = {0.5}, v = {0.4, 0.6};
    CHECK(directed_hausdorff(u, v) == doctest::Approx(0.1));
    CHECK(directed_hausdorff(v, u) == doctest::Approx(0.1));

    const std::vector<double> a = {0.0}, b = {0.0, 1.0};
    CHECK(directed_hausdorff(a, b) == doctest::Approx(1.0));  // asymmetry witness
    CHECK(directed_hausdorff(b, a) == doctest::Approx(0.0));
    CHECK(hausdorff(a, b) == doctest::Approx(1.0));

    CHECK_THROWS_AS(directed_hausdorff({}, b), std::invalid_argument);
    CHECK_THROWS_AS(directed_hausdorff(a, {}), std::invalid_argument);
}

TEST_CASE("hausdorff metric axioms on random finite sets") {
    knotfit::Rng rng(4);
    const auto random_set = [&](int max_size) {
        std::vector<double> s(static_cast<std::size_t>(1 + rng.uniform_int(max_size)));
        for (auto& v : s) v = rng.uniform();
        return s;
    };
    for (int rep = 0; rep < 200; ++rep) {
        const auto a = random_set(6), b = random_set(6), c = random_set(6);
        const double ab = hausdorff(a, b), ba = hausdorff(b, a);
        CHECK(ab == ba);
        CHECK(hausdorff(a, a) == 0.0);
        CHECK(ab <= hausdorff(a, c) + hausdorff(c, b) + 1e-15);
    }
}

TEST_CASE("normalized sup norm") {
    std::vector<double> pts = {0.0, 0.5, 1.0};
    Eigen::VectorXd truth(3);
    truth << -1.0, 0.0, 1.0;  // range 2
    const EvaluationGrid grid = EvaluationGrid::make(pts, truth);
    CHECK(grid.f_min == -1.0);
    CHECK(grid.f_max == 1.0);

    CHECK(normalized_sup_norm(truth, grid) == 0.0);
    Eigen::VectorXd off = truth;
    off[1] += 0.04;
    CHECK(normalized_sup_norm(off, grid) == doctest::Approx(0.02));

    Eigen::VectorXd constant = Eigen::VectorXd::Zero(3);
    const EvaluationGrid flat = EvaluationGrid::make(pts, constant);
    CHECK_THROWS_AS(normalized_sup_norm(constant, flat), std::invalid_argument);
}

TEST_CASE("sup norm is invariant under affine rescaling of both arguments") {
    knotfit::Rng rng(6);
    std::vector<double> pts(20);
    Eigen::VectorXd truth(20), values(20);
    for (int i = 0; i < 20; ++i) {
        pts[static_cast<std::size_t>(i)] = i / 19.0;
        truth[i] = rng.normal();
        values[i] = truth[i] + 0.1 * rng.normal();
    }
    const EvaluationGrid grid = EvaluationGrid::make(pts, truth);
    const double base = normalized_sup_norm(values, grid);

    const double a = 3.7, b = -2.0;
    const EvaluationGrid scaled = EvaluationGrid::make(pts, (a * truth.array() + b).matrix());
    const double rescaled = normalized_sup_norm((a * values.array() + b).matrix(), scaled);
    CHECK(std::abs(base - rescaled) <= 1e-12);
}

TEST_CASE("oracle selection picks the best candidate, ties to the front") {
    std::vector<double> pts = {0.0, 1.0};
    Eigen::VectorXd truth(2);
    truth << 0.0, 1.0;
    const EvaluationGrid grid = EvaluationGrid::make(pts, truth);

    Eigen::VectorXd exact = truth;
    Eigen::VectorXd off = truth;
    off[0] += 0.5;
    CHECK(lambda_opt_index({off, exact, off}, grid) == 1);
    CHECK(lambda_opt_index({exact, exact}, grid) == 0);  // tie: earlier (larger lambda)

    // argmin dominance over any particular candidate
    const int best = lambda_opt_index({off, exact}, grid);
    CHECK(normalized_sup_norm(best == 0 ? off : exact, grid) <=
          normalized_sup_norm(off, grid));
}
