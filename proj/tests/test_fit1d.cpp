#include <doctest.h>

#include <cmath>
#include <vector>

#include "knotfit/fit1d.hpp"
#include "knotfit/harness.hpp"
#include "knotfit/rng.hpp"
#include "knotfit/synthetic.hpp"
#include "oracles.hpp"

using knotfit::ebic_score;
using knotfit::extract_knots;
using knotfit::Fit1DOptions;
using knotfit::Fit1DResult;
using knotfit::fit_1d;
using knotfit::fit_spline;
using knotfit::FittedSplineModel;
using knotfit::LassoSolution;
using knotfit::SelectedKnots;

namespace {

std::vector<double> even_points(int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n - 1);
    return x;
}

}  // namespace

TEST_CASE("knot extraction maps nonzero entries to the next point") {
    const std::vector<double> pts = even_points(8);
    LassoSolution sol;
    sol.lambda = 0.3;
    sol.a.resize(5);
    sol.a << 0.0, 0.5, 0.0, -0.2, 0.0;

    const SelectedKnots sel = extract_knots(sol, pts);
    CHECK(sel.indices == std::vector<int>{2, 4});
    REQUIRE(sel.count() == 2);
    CHECK(sel.knots[0] == pts[2]);
    CHECK(sel.knots[1] == pts[4]);

    sol.a.setZero();
    CHECK(extract_knots(sol, pts).count() == 0);
}

TEST_CASE("boundary-coincident knots are dropped") {
    const std::vector<double> pts = even_points(5);
    LassoSolution sol;
    sol.a.resize(4);  // fused-style operator, candidate indices 1..4
    sol.a << 0.0, 0.0, 0.0, 1.0;  // maps to the last point
    const SelectedKnots sel = extract_knots(sol, pts);
    CHECK(sel.count() == 0);
}

TEST_CASE("noiseless spline data is recovered exactly on the true knots") {
    const knotfit::SyntheticFunction f1 = knotfit::SyntheticFunction::f1();
    const std::vector<double> pts = even_points(201);
    Eigen::VectorXd y(201);
    for (int i = 0; i < 201; ++i) y[i] = f1(pts[static_cast<std::size_t>(i)]);

    const FittedSplineModel model =
        fit_spline(y, pts, {0.1, 0.27, 0.745}, 2, std::make_pair(0.0, 1.0));
    REQUIRE(model.gamma.size() == 6);
    Eigen::VectorXd expected(6);
    expected << 0.0, -2.5, 0.0, 0.0, 4.3, 0.0;
    CHECK((model.gamma - expected).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK(std::sqrt(model.ss) <= 1e-8);
    CHECK(model.ss <= 1e-12 * y.squaredNorm());
    CHECK_FALSE(model.rank_warning);

    // exact pointwise reproduction, including the clamped left end
    CHECK(model.predict(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    const double oracle_half = testutil::piecewise_bspline(
        {0, 0, 0, 0.1, 0.27, 0.745, 1, 1, 1}, 1.0, 4, 3, 0.5);
    CHECK(model.predict(0.5) == doctest::Approx(4.3 * oracle_half).epsilon(1e-10));
}

TEST_CASE("degenerate fits") {
    const std::vector<double> pts = even_points(10);
    knotfit::Rng rng(2);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = rng.normal();

    // no knots, degree zero: single constant basis, coefficient is the mean
    const FittedSplineModel mean_fit = fit_spline(y, pts, {}, 0);
    REQUIRE(mean_fit.gamma.size() == 1);
    CHECK(mean_fit.gamma[0] == doctest::Approx(y.mean()).epsilon(1e-12));

    // constant response is inside every clamped spline space
    Eigen::VectorXd c = Eigen::VectorXd::Constant(10, 4.2);
    const FittedSplineModel const_fit = fit_spline(c, pts, {0.3, 0.6}, 2);
    for (double x : pts) CHECK(const_fit.predict(x) == doctest::Approx(4.2).epsilon(1e-10));
}

TEST_CASE("information criterion arithmetic") {
    // n=10, q=2, K=2, K_max=10: 1 + 5 ln 10 + 2 ln C(13,5)
    CHECK(ebic_score(1.0, 10, 2, 2, 10) == doctest::Approx(26.8326).epsilon(1e-4));
    // K == K_max: combinatorial term vanishes
    CHECK(ebic_score(2.0, 10, 2, 10, 10) ==
          doctest::Approx(2.0 + 13.0 * std::log(10.0)).epsilon(1e-12));
    CHECK(ebic_score(1.0, 10, 2, 2, 10) == ebic_score(1.0, 10, 2, 2, 10));
    CHECK_THROWS_AS(ebic_score(1.0, 10, 2, 11, 10), std::invalid_argument);
}

TEST_CASE("polynomial data selects a knot-free model") {
    const std::vector<double> pts = even_points(30);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        const double x = pts[static_cast<std::size_t>(i)];
        y[i] = 0.5 - x + 2.0 * x * x;
    }
    Fit1DOptions opts;
    const Fit1DResult fit = fit_1d(y, pts, opts);
    CHECK(fit.model.knots.num_interior() == 0);
    CHECK(fit.model.ss <= 1e-12 * y.squaredNorm());
}

TEST_CASE("criterion selection is shift invariant") {
    knotfit::ExperimentConfig cfg = knotfit::make_experiment("f1-noise");
    const knotfit::Sample1D sample = knotfit::sample_observations_1d(cfg, 60, 0);

    Fit1DOptions opts;
    opts.bounds = {{0.0, 1.0}};
    const Fit1DResult base = fit_1d(sample.y, sample.x, opts);
    const Fit1DResult shifted = fit_1d(sample.y.array() + 5.0, sample.x, opts);

    CHECK(shifted.selected_index == base.selected_index);
    CHECK(shifted.model.knots.interior() == base.model.knots.interior());
    for (double x : {0.0, 0.31, 0.77, 1.0}) {
        CHECK(shifted.model.predict(x) - base.model.predict(x) ==
              doctest::Approx(5.0).epsilon(1e-6));
    }

    // determinism of the selection
    const Fit1DResult again = fit_1d(sample.y, sample.x, opts);
    CHECK(again.selected_index == base.selected_index);
    CHECK(again.model.gamma == base.model.gamma);
}

TEST_CASE("normal equations hold for noisy fits") {
    knotfit::Rng rng(8);
    const std::vector<double> pts = even_points(50);
    Eigen::VectorXd y(50);
    for (int i = 0; i < 50; ++i) y[i] = std::cos(7.0 * pts[static_cast<std::size_t>(i)]) + 0.2 * rng.normal();

    const FittedSplineModel model = fit_spline(y, pts, {0.25, 0.5, 0.75}, 2);
    const Eigen::MatrixXd b = knotfit::design_matrix(model.knots, pts);
    CHECK((b.transpose() * (y - b * model.gamma)).lpNorm<Eigen::Infinity>() <=
          1e-8 * y.norm());
}

TEST_CASE("exact recovery of a random candidate-space spline") {
    knotfit::Rng rng(88);
    const std::vector<double> pts = even_points(80);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> knots = testutil::random_increasing(rng, 3, 0.1, 0.9, 0.05);
        knotfit::AugmentedKnotVector akv(knots, 3, 0.0, 1.0);
        Eigen::VectorXd gamma(akv.num_basis());
        for (int i = 0; i < gamma.size(); ++i) gamma[i] = rng.normal();

        Eigen::VectorXd y(80);
        for (int i = 0; i < 80; ++i) y[i] = akv.basis_row(pts[static_cast<std::size_t>(i)]).dot(gamma);

        const FittedSplineModel model = fit_spline(y, pts, knots, 2, std::make_pair(0.0, 1.0));
        CHECK(model.ss <= 1e-12 * y.squaredNorm());
    }
}

TEST_CASE("prediction domain is closed and enforced") {
    const std::vector<double> pts = even_points(12);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(12);
    FittedSplineModel model = fit_spline(y, pts, {0.5}, 1);
    CHECK(model.predict(0.0) == 0.0);
    CHECK(model.predict(1.0) == 0.0);
    CHECK_THROWS_AS(model.predict(1.0 + 1e-9), std::domain_error);
    CHECK_THROWS_AS(model.predict(-0.1), std::domain_error);
}

TEST_CASE("input sanitation") {
    Eigen::VectorXd y(4);
    y << 1, 2, 3, 4;
    CHECK_THROWS_WITH_AS(fit_1d(y, std::vector<double>{0.0, 0.5, 0.5, 1.0}, {}),
                         doctest::Contains("duplicate"), std::invalid_argument);
    CHECK_THROWS_AS(fit_1d(y, std::vector<double>{0.0, 0.3, 0.7}, {}), std::invalid_argument);

    // unsorted input gives the same model as sorted input
    const std::vector<double> sorted = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::vector<double> shuffled = {0.6, 0.0, 1.0, 0.2, 0.8, 0.4};
    Eigen::VectorXd ys(6), yu(6);
    for (int i = 0; i < 6; ++i) ys[i] = std::sin(3.0 * sorted[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 6; ++i) yu[i] = std::sin(3.0 * shuffled[static_cast<std::size_t>(i)]);
    Fit1DOptions opts;
    opts.degree = 1;
    const Fit1DResult a = fit_1d(ys, sorted, opts);
    const Fit1DResult b = fit_1d(yu, shuffled, opts);
    CHECK(a.model.gamma == b.model.gamma);
}
