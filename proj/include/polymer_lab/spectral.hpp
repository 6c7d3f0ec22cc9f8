#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymer_lab/radial.hpp"

/// Spectral constants of H_beta = (1/2) Laplacian + beta v for a radial,
/// compactly supported v >= 0, via the substitution u = r w which turns the
/// radial problem into (1/2) u'' + beta v u = lambda u on [0, inf), u(0) = 0.
namespace polymer_lab::spectral {

class PotentialError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SpectralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Piecewise-linear radial profile on [0, R_support], zero beyond.
class RadialPotential {
public:
    /// grid must start at 0 and end at support_radius; values >= 0, not all zero.
    RadialPotential(std::vector<double> grid, std::vector<double> values, double support_radius);

    /// (pi^2 / (8 eps^2) + gamma / eps) on r <= eps.
    static RadialPotential ball(double eps, double gamma);
    /// height (1 - r/radius) on r <= radius.
    static RadialPotential triangle(double height, double radius);

    /// v(r); at r = R_support the interior limit is returned.
    double operator()(double r) const;
    /// Exact integral of v over [a, b].
    double integral(double a, double b) const;
    /// Potential multiplied by a constant.
    RadialPotential scaled(double factor) const;

    double support_radius() const { return support_; }
    double max_value() const;
    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::string describe() const { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    double support_;
    std::string label_ = "grid";
};

/// Zero-energy radial solution u (u(0) = 0, u'(0) = 1) integrated to R_support.
struct ZeroEnergyShot {
    double u_end;
    double du_end;
    int interior_nodes;  ///< sign changes of u on (0, R_support]
    double v_u_r;        ///< int_0^R v u r dr
    double v_u_sq;       ///< int_0^R v u^2 dr
};

struct ShootingConfig {
    int steps = 4096;  ///< RK4 steps across the support
    double beta_lo = 1e-6;
    double beta_hi = 1e6;
    double rel_tol = 1e-13;
};

ZeroEnergyShot shoot_zero_energy(const RadialPotential& v, double beta, int steps = 4096);

/// Smallest beta with u'(R_support) = 0.
double critical_beta(const RadialPotential& v, const ShootingConfig& cfg = {});

/// psi = u / r at criticality, scaled so that psi(r) = 1/r for r >= R_support.
class GroundState {
public:
    GroundState(std::vector<double> r, std::vector<double> u, std::vector<double> du);

    double operator()(double r) const;
    double at_origin() const { return du_.front() * scale_; }
    double support_radius() const { return r_.back(); }
    /// Interior nodes (r, psi(r)) followed by exterior samples out to `outer`.
    std::vector<std::pair<double, double>> samples(double outer, int exterior_points = 64,
                                                   int stride = 16) const;

private:
    std::vector<double> r_;
    std::vector<double> u_;
    std::vector<double> du_;
    double scale_;
};

GroundState ground_state_psi(const RadialPotential& v, double beta_cr, int steps = 4096);

/// int_{R^3} v psi and int_{R^3} v psi^2.
double integral_v_psi(const RadialPotential& v, const GroundState& psi);
double integral_v_psi_sq(const RadialPotential& v, const GroundState& psi);

/// (int v psi)^2 / (sqrt(2) pi int v psi^2).
double gamma1(const RadialPotential& v, const GroundState& psi);

enum class EigenStatus { present, absent, indeterminate };

struct EigenResult {
    EigenStatus status = EigenStatus::absent;
    double value = 0.0;           ///< lambda_0 when present
    double domain_length = 0.0;   ///< L of the final Dirichlet box
    int grid_points = 0;
};

struct EigenConfig {
    int interior_cells = 4096;      ///< uniform cells on [0, max(4, 4 R)]
    double growth = 1.03;           ///< cell ratio in the stretched exterior
    double decay_lengths = 30.0;    ///< required kappa (L - R) with kappa = sqrt(2 lambda)
    double zero_tol = 1e-12;        ///< values below this are indeterminate
};

/// Top of the spectrum of H_beta if positive.
EigenResult principal_eigenvalue(const RadialPotential& v, double beta, const EigenConfig& cfg = {});

/// beta with principal_eigenvalue(v, beta) = lambda.
double beta0_of_lambda(const RadialPotential& v, double lambda, double beta_cr,
                       const EigenConfig& cfg = {});
double beta0_of_lambda(const RadialPotential& v, double lambda);

struct ExpansionFit {
    double gamma1;
    double intercept;    ///< fitted 1/beta_cr
    double linear;       ///< O(lambda) coefficient
    double r_squared;
    std::vector<double> lambdas;
    std::vector<double> inverse_beta;
};

class FitError : public SpectralError {
public:
    using SpectralError::SpectralError;
};

/// Least-squares fit of 1/beta_0(lambda) = a - g sqrt(lambda) + b lambda; returns g.
ExpansionFit gamma1_via_expansion(const RadialPotential& v,
                                  std::vector<double> lambdas = {1e-4, 4e-4, 1e-3, 2e-3, 4e-3});

struct PowerLawFit {
    double exponent;
    double coefficient;   ///< least squares at exponent 2
    std::vector<double> deltas;
    std::vector<double> eigenvalues;
};

/// Fits lambda_0(beta_cr + delta) = C delta^p in log-log coordinates.
PowerLawFit eigenvalue_power_law(const RadialPotential& v, double beta_cr, std::vector<double> deltas);

struct SpectralSummary {
    double beta_cr;
    GroundState psi;
    double gamma1;
    double kappa;
    double c;
    double int_v_psi;
    double int_v_psi_sq;
};

SpectralSummary summarize(const RadialPotential& v, const ShootingConfig& cfg = {});

/// c chi.
double gamma_of_chi(const SpectralSummary& s, double chi);

/// kappa int_{R^3} psi f.
double alpha_of_f(const SpectralSummary& s, const RadialFunction& f);

std::string to_string(EigenStatus status);

}  // namespace polymer_lab::spectral
