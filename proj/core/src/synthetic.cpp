#include "knotfit/synthetic.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "knotfit/splines.hpp"

namespace knotfit {

SyntheticFunction SyntheticFunction::f1() {
    auto basis = std::make_shared<AugmentedKnotVector>(
        std::vector<double>{0.1, 0.27, 0.745}, 3, 0.0, 1.0);
    SyntheticFunction f;
    f.name = "f1";
    f.d = 1;
    f.true_knots = {{0.1, 0.27, 0.745}};
    f.eval = [basis](std::span<const double> x) {
        return -2.5 * basis->basis(1, 3, x[0]) + 4.3 * basis->basis(4, 3, x[0]);
    };
    return f;
}

SyntheticFunction SyntheticFunction::f2() {
    auto b1 = std::make_shared<AugmentedKnotVector>(std::vector<double>{0.24, 0.545}, 3,
                                                    0.0, 1.0);
    auto b2 = std::make_shared<AugmentedKnotVector>(std::vector<double>{0.395, 0.645}, 3,
                                                    0.0, 1.0);
    SyntheticFunction f;
    f.name = "f2";
    f.d = 2;
    f.true_knots = {{0.24, 0.545}, {0.395, 0.645}};
    f.eval = [b1, b2](std::span<const double> x) {
        return 2.3 * b1->basis(2, 3, x[0]) * b2->basis(2, 3, x[1]) -
               1.5 * b1->basis(3, 3, x[0]) * b2->basis(4, 3, x[1]);
    };
    return f;
}

SyntheticFunction SyntheticFunction::smooth2d() {
    SyntheticFunction f;
    f.name = "smooth2d";
    f.d = 2;
    f.true_knots = {{}, {}};
    f.eval = [](std::span<const double> x) {
        return (1.0 - std::exp(-4.0 * x[0])) * (1.0 - std::exp(-2.5 * x[1]));
    };
    return f;
}

SyntheticFunction SyntheticFunction::smooth3d() {
    SyntheticFunction f;
    f.name = "smooth3d";
    f.d = 3;
    f.true_knots = {{}, {}, {}};
    f.eval = [](std::span<const double> x) {
        return (1.0 - std::exp(-4.0 * x[0])) * (1.0 - std::exp(-2.5 * x[1])) *
               (1.0 - std::exp(-3.0 * x[2]));
    };
    return f;
}

SyntheticFunction SyntheticFunction::by_name(const std::string& name) {
    if (name == "f1") return f1();
    if (name == "f2") return f2();
    if (name == "smooth2d") return smooth2d();
    if (name == "smooth3d") return smooth3d();
    throw std::invalid_argument("unknown synthetic function '" + name +
                                "' (valid: f1, f2, smooth2d, smooth3d)");
}

}  // namespace knotfit
