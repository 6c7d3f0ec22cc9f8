#include <doctest.h>

#include <cmath>
#include <numbers>

#include "polymer_lab/laplace.hpp"

using namespace polymer_lab::laplace;

namespace {

constexpr double pi = std::numbers::pi;

// K written with plain exp and erfc; valid while (rho - gamma t)/sqrt(2t) stays moderate
double kernel_reference(double gamma, double rho, double t) {
    const double z = (rho - gamma * t) / std::sqrt(2.0 * t);
    return std::exp(-rho * rho / (2.0 * t)) / std::sqrt(2.0 * pi * t) +
           0.5 * gamma * std::exp(-gamma * rho + 0.5 * gamma * gamma * t) * std::erfc(z);
}

TransformFn rational(int power) {
    return {[power](Complex z) { return std::pow(z, -power); }, 0.0, false};
}

}  // namespace

TEST_CASE("inverts elementary transforms") {
    ContourSpec c;
    CHECK(bromwich_invert(rational(1), 1.0, c) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bromwich_invert(rational(2), 2.0, c) == doctest::Approx(2.0).epsilon(1e-10));
    const TransformFn exp_sqrt{[](Complex z) {
                                   const Complex s = std::sqrt(2.0L * z);
                                   return std::exp(-s) / s;
                               },
                               0.0, false};
    const double expected = std::exp(-0.5) / std::sqrt(2.0 * pi);
    CHECK(bromwich_invert(exp_sqrt, 1.0, c) == doctest::Approx(expected).epsilon(1e-10));
    ContourSpec vertical;
    vertical.shape = ContourShape::vertical;
    CHECK(bromwich_invert(exp_sqrt, 1.0, vertical) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("kernel examples") {
    CHECK(kernel_integral(0.0, 1.0, 1.0, default_contour(0.0)) ==
          doctest::Approx(0.24197072451914337).epsilon(1e-10));
    // e^{-1/2} (1/sqrt(2 pi) + 1/2 erfcx(0))
    const double k1 = std::exp(-0.5) * (1.0 / std::sqrt(2.0 * pi) + 0.5);
    CHECK(k1 == doctest::Approx(0.5452361).epsilon(1e-7));
    CHECK(kernel_integral(1.0, 1.0, 1.0, default_contour(1.0)) == doctest::Approx(k1).epsilon(1e-10));
}

TEST_CASE("kernel quadrature matches the closed form and an independent reference") {
    for (double gamma : {-2.0, 0.0, 1.0, 2.0}) {
        for (double t : {0.1, 0.5, 1.0}) {
            for (double rho : {0.1, 1.0, 5.0}) {
                const ContourSpec c = saddle_adapted(default_contour(gamma), rho, t);
                const double q = kernel_integral(gamma, rho, t, c);
                CHECK(q == doctest::Approx(kernel_closed_form(gamma, rho, t)).epsilon(1e-8));
                CHECK(q == doctest::Approx(kernel_reference(gamma, rho, t)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("kernel is contour invariant") {
    for (double gamma : {-2.0, 1.0}) {
        for (double rho : {0.1, 1.0}) {
            const double t = 0.5;
            const ContourSpec base = saddle_adapted(default_contour(gamma), rho, t);
            ContourSpec doubled = base;
            doubled.apex *= 2.0;
            ContourSpec vertical = base;
            vertical.shape = ContourShape::vertical;
            vertical.nodes = 1600;
            const double k = kernel_integral(gamma, rho, t, base);
            CHECK(kernel_integral(gamma, rho, t, doubled) == doctest::Approx(k).epsilon(1e-10));
            CHECK(kernel_integral(gamma, rho, t, vertical) == doctest::Approx(k).epsilon(1e-6));
        }
    }
}

TEST_CASE("kernel decays in rho") {
    double prev = kernel_closed_form(1.0, 1.0, 1.0);
    for (double rho = 2.0; rho <= 20.0; rho += 2.0) {
        const double k = kernel_integral(1.0, rho, 1.0, saddle_adapted(default_contour(1.0), rho, 1.0));
        CHECK(k < prev);
        prev = k;
    }
    CHECK(prev < 1e-80);
}

TEST_CASE("survival integral is the time integral of the kernel") {
    for (double gamma : {-1.0, 0.0, 1.5}) {
        for (double rho : {0.0, 0.5, 2.0}) {
            const double t = 0.8;
            const double j = survival_integral(gamma, rho, t, saddle_adapted(default_contour(gamma), rho, t));
            CHECK(j == doctest::Approx(survival_closed_form(gamma, rho, t)).epsilon(1e-9));
            if (rho > 0.0) {
                // substitute s = u^2 to remove the endpoint layer at s = 0
                double sum = 0.0;
                const int n = 4000;
                const double hu = std::sqrt(t) / n;
                for (int i = 0; i < n; ++i) {
                    const double u = (i + 0.5) * hu;
                    sum += 2.0 * u * kernel_reference(gamma, rho, u * u) * hu;
                }
                CHECK(j == doctest::Approx(sum).epsilon(1e-6));
            }
        }
    }
    // J(0, 0, 1) = sqrt(2/pi)
    CHECK(survival_closed_form(0.0, 0.0, 1.0) == doctest::Approx(std::sqrt(2.0 / pi)).epsilon(1e-14));
}

TEST_CASE("contour placement and symmetry checks") {
    ContourSpec bad;
    bad.apex = 0.5;
    CHECK_THROWS_AS(kernel_integral(2.0, 1.0, 1.0, bad), ContourPlacementError);
    ContourSpec origin;
    origin.apex = 0.0;
    CHECK_THROWS_AS(kernel_integral(0.0, 1.0, 1.0, origin), ContourPlacementError);

    const TransformFn good{[](Complex z) { return 1.0L / (z + 1.0L); }, -1.0, true};
    CHECK(conjugate_symmetry_defect(good, ContourSpec{}) < 1e-15);
    const auto both = bromwich_invert_both_rays(good, 1.0, ContourSpec{});
    CHECK(both.real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(std::fabs(both.imag()) < 1e-12);

    const TransformFn skew{[](Complex z) { return 1.0L / (z + Complex(0.0L, 1.0L)); }, 0.0, true};
    CHECK(conjugate_symmetry_defect(skew, ContourSpec{}) > 1e-3);
}

TEST_CASE("saddle adaptation moves the apex only to the right") {
    const ContourSpec base = default_contour(0.0);
    CHECK(saddle_adapted(base, 0.1, 1.0).apex == base.apex);
    CHECK(saddle_adapted(base, 5.0, 0.1).apex == doctest::Approx(25.0 / (2.0 * 0.01)));
    CHECK(default_contour(2.0).apex == doctest::Approx(3.0));
}
