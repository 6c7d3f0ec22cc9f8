#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

/// Numerical inversion of Laplace transforms along Bromwich contours.
///
/// All contour sums are carried out in extended precision: for kernel
/// integrands with large rho^2/t the integrand on any admissible contour is
/// many orders of magnitude larger than the result, and the cancellation
/// eats the double-precision budget.
namespace polymer_lab::laplace {

using Complex = std::complex<long double>;

enum class ContourShape {
    vertical,  ///< Re(lambda) = apex
    bent45,    ///< two rays leaving the apex at +-135 degrees
};

struct ContourSpec {
    double apex = 1.0;
    ContourShape shape = ContourShape::bent45;
    /// Length of each ray. Unset means: truncate where |e^{lambda t} F| has
    /// fallen 20 decades below its running maximum.
    std::optional<double> half_length;
    /// Gauss-Legendre nodes per ray (rounded up to whole 16-point panels).
    int nodes = 400;
};

/// A transform lambda -> F(lambda), analytic right of `rightmost_singularity`.
struct TransformFn {
    std::function<Complex(Complex)> value;
    /// Real part of the rightmost singularity: 0 for the sqrt branch point,
    /// gamma^2/2 for the (sqrt(2 lambda) - gamma) pole.
    double rightmost_singularity = 0.0;
    bool has_pole = false;
};

class LaplaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite integrand at a quadrature node.
class EvaluationError : public LaplaceError {
public:
    using LaplaceError::LaplaceError;
};

/// Contour apex not strictly right of a singularity.
class ContourPlacementError : public LaplaceError {
public:
    using LaplaceError::LaplaceError;
};

/// (1/2 pi i) \int_Gamma e^{lambda t} F(lambda) d lambda for a conjugate-symmetric F.
///
/// Only the upper ray is integrated; the lower one contributes the complex
/// conjugate, so the result is Im(upper)/pi.
double bromwich_invert(const TransformFn& F, double t, const ContourSpec& c);

/// Same integral assembled from both rays without assuming symmetry. The
/// imaginary part of the result measures how far F is from conjugate symmetry.
std::complex<double> bromwich_invert_both_rays(const TransformFn& F, double t,
                                               const ContourSpec& c);

/// Largest relative |F(conj z) - conj F(z)| over sample points along the contour.
double conjugate_symmetry_defect(const TransformFn& F, const ContourSpec& c,
                                 int samples = 64);

/// (1/2 pi i) \int e^{lambda t - sqrt(2 lambda) rho} / (sqrt(2 lambda) - gamma) d lambda.
double kernel_integral(double gamma, double rho, double t, const ContourSpec& c);

/// (1/2 pi i) \int e^{lambda t - sqrt(2 lambda) rho} / ((sqrt(2 lambda) - gamma) lambda) d lambda.
///
/// This is the time integral of kernel_integral over [0, t]; rho = 0 is allowed.
double survival_integral(double gamma, double rho, double t, const ContourSpec& c);

/// Contour with apex max(0, gamma^2/2) + delta.
ContourSpec default_contour(double gamma, double delta = 1.0);

/// Moves the apex right to the saddle rho^2/(2 t^2) of lambda t - sqrt(2 lambda) rho
/// when the saddle lies right of `base.apex`. Other fields are kept.
ContourSpec saddle_adapted(const ContourSpec& base, double rho, double t);

/// erfcx form of kernel_integral:
/// e^{-rho^2/2t} [1/sqrt(2 pi t) + (gamma/2) erfcx((rho - gamma t)/sqrt(2t))].
double kernel_closed_form(double gamma, double rho, double t);

/// Closed form of survival_integral:
/// (1/gamma) [e^{-rho^2/2t} erfcx((rho - gamma t)/sqrt(2t)) - erfc(rho/sqrt(2t))],
/// with the gamma = 0 limit sqrt(2t/pi) e^{-rho^2/2t} - rho erfc(rho/sqrt(2t)).
double survival_closed_form(double gamma, double rho, double t);

std::string to_string(ContourShape shape);

}  // namespace polymer_lab::laplace
