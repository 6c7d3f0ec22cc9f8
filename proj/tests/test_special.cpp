#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "polymer_lab/radial.hpp"
#include "polymer_lab/special.hpp"

using namespace polymer_lab;

namespace {

// extended-precision reference, valid while erfcl does not underflow
long double erfcx_reference(long double x) {
    return std::exp(x * x) * std::erfc(x);
}

}  // namespace

TEST_CASE("erfcx agrees with exp(x^2) erfc(x) in extended precision") {
    for (double x = -5.0; x <= 100.0; x += 0.173) {
        const double ref = static_cast<double>(erfcx_reference(x));
        CHECK(erfcx(x) == doctest::Approx(ref).epsilon(1e-13));
    }
    CHECK(erfcx(0.0) == 1.0);
}

TEST_CASE("erfcx follows its asymptotic series far out") {
    for (double x : {1e3, 1e5, 1e10, 1e100}) {
        const double series = (1.0 - 0.5 / (x * x)) / (x * std::sqrt(std::numbers::pi));
        CHECK(erfcx(x) == doctest::Approx(series).epsilon(1e-12));
    }
    CHECK(std::isinf(erfcx(-30.0)));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials of degree 2n-1 exactly") {
    for (int n : {1, 2, 5, 16, 40}) {
        const GaussRule rule = gauss_legendre(n);
        REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
        for (int degree = 0; degree <= 2 * n - 1; ++degree) {
            long double sum = 0.0L;
            for (int k = 0; k < n; ++k) sum += rule.weights[k] * std::pow(rule.nodes[k], degree);
            const double exact = degree % 2 == 0 ? 2.0 / (degree + 1) : 0.0;
            CHECK(static_cast<double>(sum) == doctest::Approx(exact).epsilon(1e-14));
        }
    }
}

TEST_CASE("composite rules and the trapezoid") {
    CHECK(integrate_gl([](double x) { return std::exp(-x); }, 0.0, 20.0, 8) ==
          doctest::Approx(1.0 - std::exp(-20.0)).epsilon(1e-14));
    const std::vector<double> x{0.0, 0.5, 2.0, 3.0};
    const std::vector<double> y{1.0, 2.0, 2.0, 0.0};
    CHECK(trapezoid(x, y) == doctest::Approx(0.75 + 3.0 + 1.0));
}

TEST_CASE("radial grids and densities") {
    const auto grid = geometric_linear_grid(8.0, 2048, 128, 1e-5, 0.1);
    REQUIRE(grid.size() == 2048);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == doctest::Approx(8.0));
    for (std::size_t i = 1; i < grid.size(); ++i) REQUIRE(grid[i] > grid[i - 1]);

    std::vector<double> density;
    for (double r : grid) density.push_back(brownian_radial_density(r, 1.0));
    const RadialDensity d(grid, density);
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-5));
    // mean of |W_1| in three dimensions is 2 sqrt(2/pi)
    CHECK(d.mean() == doctest::Approx(2.0 * std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-5));
    for (double r : {0.3, 1.0, 2.5}) {
        CHECK(d.cdf(r) == doctest::Approx(brownian_radial_cdf(r, 1.0)).epsilon(1e-5));
    }
    CHECK(d.cdf(-1.0) == 0.0);
    CHECK(d.cdf(100.0) == doctest::Approx(1.0));

    const RadialFunction f({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
    CHECK(f(0.5) == doctest::Approx(1.0));
    CHECK(f(3.0) == 0.0);
}
