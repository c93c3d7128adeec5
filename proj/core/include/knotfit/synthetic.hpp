#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace knotfit {

/**
 * Ground-truth functions for the benchmark harness.
 *
 * f1 is a one-dimensional linear combination of two quadratic splines with
 * knots (0.1, 0.27, 0.745); f2 is a two-dimensional tensor-product surface
 * with knots (0.24, 0.545) and (0.395, 0.645).  smooth2d / smooth3d are
 * knot-free saturating surfaces standing in for externally computed
 * chemistry responses; they make no reference claim.
 */
struct SyntheticFunction {
    std::string name;
    int d = 1;
    std::vector<std::vector<double>> true_knots;  // per dimension; empty when none
    std::function<double(std::span<const double>)> eval;

    double operator()(std::span<const double> x) const { return eval(x); }
    double operator()(double x) const { return eval(std::span<const double>(&x, 1)); }
    double operator()(double x1, double x2) const {
        const double p[2] = {x1, x2};
        return eval(std::span<const double>(p, 2));
    }

    static SyntheticFunction f1();
    static SyntheticFunction f2();
    static SyntheticFunction smooth2d();
    static SyntheticFunction smooth3d();
    static SyntheticFunction by_name(const std::string& name);
};

}  // namespace knotfit
