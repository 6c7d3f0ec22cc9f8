#include "polymer_lab/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "polymer_lab/special.hpp"

namespace polymer_lab::laplace {

namespace {

using Integrand = std::function<Complex(Complex)>;

constexpr long double kTailDecades = 20.0L;
constexpr int kPanelOrder = 16;
constexpr int kMaxPanels = 1 << 20;

Complex ray_direction(ContourShape shape) {
    if (shape == ContourShape::vertical) {
        return {0.0L, 1.0L};
    }
    const long double h = std::sqrt(0.5L);
    return {-h, h};
}

void check_placement(const ContourSpec& c, double singularity, bool has_pole, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("bromwich_invert: t must be positive and finite");
    }
    if (c.nodes < kPanelOrder) {
        throw std::invalid_argument("bromwich_invert: at least 16 nodes per ray are required");
    }
    if (c.half_length && !(*c.half_length > 0.0)) {
        throw std::invalid_argument("bromwich_invert: half_length must be positive");
    }
    if (!(c.apex > 0.0)) {
        throw ContourPlacementError("contour apex must be positive (branch cut on (-inf, 0])");
    }
    if (!(c.apex > singularity)) {
        std::ostringstream msg;
        msg << "contour apex " << c.apex << " is not right of the "
            << (has_pole ? "pole" : "singularity") << " at " << singularity;
        throw ContourPlacementError(msg.str());
    }
}

/// Panel widths along one ray: geometric growth from `first` up to `cap`,
/// scaled so the panels tile [0, length].
std::vector<long double> panel_widths(long double length, long double first, long double cap,
                                      int panels) {
    panels = std::max(panels, static_cast<int>(std::ceil(1.25L * length / cap)));
    if (panels > kMaxPanels) {
        throw LaplaceError("contour needs more than 2^20 panels; integrand decays too slowly");
    }
    std::vector<long double> widths(panels, length / panels);
    first = std::min(first, cap);
    if (first * panels >= length) {
        return widths;
    }
    auto tiled = [&](long double growth) {
        long double total = 0.0L;
        long double w = first;
        for (int k = 0; k < panels; ++k) {
            total += std::min(w, cap);
            w *= growth;
        }
        return total;
    };
    long double lo = 1.0L;
    long double hi = 2.0L;
    while (tiled(hi) < length) {
        hi *= 2.0L;
    }
    for (int iter = 0; iter < 200; ++iter) {
        const long double mid = 0.5L * (lo + hi);
        (tiled(mid) < length ? lo : hi) = mid;
    }
    long double w = first;
    long double total = 0.0L;
    for (int k = 0; k < panels; ++k) {
        widths[k] = std::min(w, cap);
        total += widths[k];
        w *= hi;
    }
    // absorb the bisection residue so the tiling ends exactly at `length`
    widths.back() += length - total;
    return widths;
}

long double find_truncation(const Integrand& g, Complex apex, Complex dir, long double first) {
    const long double floor = std::pow(10.0L, -kTailDecades);
    long double peak = std::abs(g(apex));
    auto quiet = [&](long double s) {
        const long double mag = std::abs(g(apex + s * dir));
        if (std::isfinite(static_cast<double>(mag))) {
            peak = std::max(peak, mag);
        }
        return mag <= peak * floor;
    };
    long double prev = 0.0L;
    long double s = first;
    for (int k = 0; k < 80; ++k, prev = s, s *= 2.0L) {
        if (!quiet(s) || !quiet(2.0L * s)) {
            continue;
        }
        // envelope crossed the floor somewhere in (prev, s]
        long double lo = prev;
        long double hi = s;
        for (int iter = 0; iter < 40 && hi - lo > 1e-3L * hi; ++iter) {
            const long double mid = 0.5L * (lo + hi);
            (quiet(mid) ? hi : lo) = mid;
        }
        return hi;
    }
    throw LaplaceError("no truncation point found: integrand does not decay along the contour");
}

struct RayIntegral {
    Complex value;
    long double length;
};

RayIntegral integrate_ray(const Integrand& g, const ContourSpec& c, Complex dir, double t,
                          double singularity) {
    const Complex apex(c.apex, 0.0L);
    const long double first = 0.5L * (static_cast<long double>(c.apex) - singularity);
    const long double length =
        c.half_length ? static_cast<long double>(*c.half_length) : find_truncation(g, apex, dir, first);
    // one oscillation period of e^{i Im(lambda) t} per panel on the vertical line
    const long double cap = (c.shape == ContourShape::vertical ? 2.0L * std::numbers::pi_v<long double> : 6.0L) / t;
    const auto widths = panel_widths(length, first, cap, (c.nodes + kPanelOrder - 1) / kPanelOrder);

    const GaussRule& rule = gauss_legendre_16();
    Complex sum(0.0L, 0.0L);
    long double lo = 0.0L;
    std::size_t index = 0;
    for (long double w : widths) {
        const long double mid = lo + 0.5L * w;
        for (int k = 0; k < kPanelOrder; ++k, ++index) {
            const long double s = mid + 0.5L * w * rule.nodes[k];
            const Complex lambda = apex + s * dir;
            const Complex value = g(lambda);
            if (!std::isfinite(static_cast<double>(value.real())) ||
                !std::isfinite(static_cast<double>(value.imag()))) {
                std::ostringstream msg;
                msg << "non-finite integrand at node " << index << " (lambda = "
                    << static_cast<double>(lambda.real()) << (lambda.imag() < 0 ? " - " : " + ")
                    << std::fabs(static_cast<double>(lambda.imag())) << "i)";
                throw EvaluationError(msg.str());
            }
            sum += (0.5L * w * rule.weights[k]) * value;
        }
        lo += w;
    }
    return {sum * dir, length};
}

Integrand with_exponential(const TransformFn& F, double t) {
    return [&F, t](Complex lambda) { return std::exp(lambda * static_cast<long double>(t)) * F.value(lambda); };
}

Integrand kernel_integrand(double gamma, double rho, double t, bool divide_by_lambda) {
    const long double g = gamma;
    const long double r = rho;
    const long double tt = t;
    return [g, r, tt, divide_by_lambda](Complex lambda) {
        const Complex q = std::sqrt(2.0L * lambda);
        Complex value = std::exp(lambda * tt - q * r) / (q - g);
        if (divide_by_lambda) {
            value /= lambda;
        }
        return value;
    };
}

double invert(const Integrand& g, double t, const ContourSpec& c, double singularity, bool has_pole) {
    check_placement(c, singularity, has_pole, t);
    const RayIntegral upper = integrate_ray(g, c, ray_direction(c.shape), t, singularity);
    return static_cast<double>(upper.value.imag() / std::numbers::pi_v<long double>);
}

double pole_abscissa(double gamma) { return gamma > 0.0 ? 0.5 * gamma * gamma : 0.0; }

}  // namespace

double bromwich_invert(const TransformFn& F, double t, const ContourSpec& c) {
    if (!F.value) {
        throw std::invalid_argument("bromwich_invert: empty transform");
    }
    return invert(with_exponential(F, t), t, c, F.rightmost_singularity, F.has_pole);
}

std::complex<double> bromwich_invert_both_rays(const TransformFn& F, double t, const ContourSpec& c) {
    check_placement(c, F.rightmost_singularity, F.has_pole, t);
    const Integrand g = with_exponential(F, t);
    const Complex dir = ray_direction(c.shape);
    const RayIntegral upper = integrate_ray(g, c, dir, t, F.rightmost_singularity);
    ContourSpec lower_spec = c;
    lower_spec.half_length = static_cast<double>(upper.length);
    const RayIntegral lower = integrate_ray(g, lower_spec, std::conj(dir), t, F.rightmost_singularity);
    // the lower ray is traversed towards the apex
    const Complex total = (upper.value - lower.value) /
                          Complex(0.0L, 2.0L * std::numbers::pi_v<long double>);
    return {static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

double conjugate_symmetry_defect(const TransformFn& F, const ContourSpec& c, int samples) {
    const Complex apex(c.apex, 0.0L);
    const Complex dir = ray_direction(c.shape);
    const long double reach = c.half_length.value_or(100.0 * std::max(1.0, c.apex));
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const long double s = reach * std::pow(static_cast<long double>(k + 1) / samples, 2.0L);
        const Complex z = apex + s * dir;
        const Complex a = F.value(std::conj(z));
        const Complex b = std::conj(F.value(z));
        const long double scale = std::max(std::abs(a), std::abs(b));
        if (scale > 0.0L) {
            worst = std::max(worst, static_cast<double>(std::abs(a - b) / scale));
        }
    }
    return worst;
}

double kernel_integral(double gamma, double rho, double t, const ContourSpec& c) {
    if (!(rho > 0.0)) {
        throw std::invalid_argument("kernel_integral: rho must be positive");
    }
    return invert(kernel_integrand(gamma, rho, t, false), t, c, pole_abscissa(gamma), gamma > 0.0);
}

double survival_integral(double gamma, double rho, double t, const ContourSpec& c) {
    if (!(rho >= 0.0)) {
        throw std::invalid_argument("survival_integral: rho must be non-negative");
    }
    return invert(kernel_integrand(gamma, rho, t, true), t, c, pole_abscissa(gamma), gamma > 0.0);
}

ContourSpec default_contour(double gamma, double delta) {
    ContourSpec c;
    c.apex = pole_abscissa(gamma) + delta;
    return c;
}

ContourSpec saddle_adapted(const ContourSpec& base, double rho, double t) {
    ContourSpec c = base;
    const double saddle = rho * rho / (2.0 * t * t);
    c.apex = std::max(base.apex, saddle);
    return c;
}

double kernel_closed_form(double gamma, double rho, double t) {
    const double gauss = std::exp(-rho * rho / (2.0 * t));
    const double free_part = gauss / std::sqrt(2.0 * std::numbers::pi * t);
    if (gamma == 0.0) {
        return free_part;
    }
    const double z = (rho - gamma * t) / std::sqrt(2.0 * t);
    if (z < -20.0) {
        // erfcx(z) = 2 e^{z^2} - erfcx(-z); fold e^{z^2} into the prefactor
        const double bound = std::exp(-gamma * rho + 0.5 * gamma * gamma * t);
        return free_part + 0.5 * gamma * (2.0 * bound - gauss * erfcx(-z));
    }
    return free_part + 0.5 * gamma * gauss * erfcx(z);
}

double survival_closed_form(double gamma, double rho, double t) {
    const double scale = std::sqrt(2.0 * t);
    const double z0 = rho / scale;
    if (std::fabs(gamma) < 1e-8) {
        return std::sqrt(2.0 * t / std::numbers::pi) * std::exp(-rho * rho / (2.0 * t)) -
               rho * std::erfc(z0);
    }
    const double z = (rho - gamma * t) / scale;
    double scaled;
    if (z < -20.0) {
        scaled = 2.0 * std::exp(-gamma * rho + 0.5 * gamma * gamma * t) -
                 std::exp(-rho * rho / (2.0 * t)) * erfcx(-z);
    } else {
        scaled = std::exp(-rho * rho / (2.0 * t)) * erfcx(z);
    }
    return (scaled - std::erfc(z0)) / gamma;
}

std::string to_string(ContourShape shape) {
    return shape == ContourShape::vertical ? "vertical" : "bent45";
}

}  // namespace polymer_lab::laplace
