#pragma once

#include <span>
#include <vector>

namespace polymer_lab {

/// Scaled complementary error function exp(x^2) * erfc(x).
///
/// Accurate to a few ulp over the whole real line; overflows to +inf only
/// where the true value does (x below about -26.6).
double erfcx(double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<long double> nodes;
    std::vector<long double> weights;
};

/// Computes the n-point rule by Newton iteration on P_n in extended precision.
GaussRule gauss_legendre(int n);

/// Cached 16-point rule, the panel rule used throughout the library.
const GaussRule& gauss_legendre_16();

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
template <class F>
double integrate_gl(F&& f, double a, double b, int panels) {
    const GaussRule& rule = gauss_legendre_16();
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        double panel = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            panel += static_cast<double>(rule.weights[k]) *
                     f(mid + 0.5 * width * static_cast<double>(rule.nodes[k]));
        }
        total += 0.5 * width * panel;
    }
    return total;
}

/// Trapezoid integral of tabulated values over a (possibly non-uniform) grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace polymer_lab
