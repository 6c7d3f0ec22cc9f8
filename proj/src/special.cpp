#include "polymer_lab/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace polymer_lab {

namespace {

// exp(x*x) with the rounding error of the square carried separately.
double exp_square(double x) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * (1.0 + lo);
}

// Continued fraction for erfcx, good for x >= 20.
double erfcx_continued_fraction(double x) {
    double tail = x;
    for (int k = 60; k >= 1; --k) {
        tail = x + (0.5 * k) / tail;
    }
    return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

}  // namespace

double erfcx(double x) {
    if (std::isnan(x)) {
        return x;
    }
    if (x >= 20.0) {
        return erfcx_continued_fraction(x);
    }
    if (x < -26.7) {
        return std::numeric_limits<double>::infinity();
    }
    return exp_square(x) * std::erfc(x);
}

GaussRule gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: n must be positive");
    }
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const long double pi = std::numbers::pi_v<long double>;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double z = std::cos(pi * (i + 0.75L) / (n + 0.5L));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L;
            long double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0L);
            const long double step = p1 / dp;
            z -= step;
            if (std::fabs(step) < 1e-19L) {
                break;
            }
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const long double w = 2.0L / ((1.0L - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

const GaussRule& gauss_legendre_16() {
    static const GaussRule rule = gauss_legendre(16);
    return rule;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("trapezoid: size mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        total += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return total;
}

}  // namespace polymer_lab
