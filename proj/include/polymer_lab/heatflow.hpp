#pragma once

#include <string>
#include <vector>

#include "polymer_lab/spectral.hpp"

/// Finite-T ground truth for the compact-potential polymer by radial
/// time stepping of du/dt = (1/2) u'' + beta v u with u = r w, u(0) = 0.
namespace polymer_lab::heatflow {

using spectral::RadialPotential;

enum class Boundary {
    dirichlet_zero,  ///< u(L) = 0: kernels
    dirichlet_one,   ///< w(L) = 1: partition functions
};

struct StepperConfig {
    double dt = 0.0;          ///< largest step; 0 means no cap beyond dt_rel
    double dt_rel = 0.01;     ///< step <= dt_rel * t
    double dt_min = 1e-4;     ///< first steps of the partition-function flow
    double L = 0.0;           ///< domain radius; 0 picks R_support + 10 sqrt(t_max) + 2
    double h = 0.004;         ///< mesh width on the fine region around the support
    double h_far = 0.0;       ///< mesh width far out; 0 picks 0.005 sqrt(t_max)
    double growth = 1.01;     ///< ratio between neighbouring cells in the transition
    Boundary boundary = Boundary::dirichlet_zero;
    double t0 = 1e-3;         ///< start of the point-source flow (capped at 0.01 R_support^2)
    int rannacher_steps = 4;  ///< implicit Euler steps before Crank-Nicolson
    bool check_dt = false;    ///< rerun with halved steps and record the change
};

/// u = r w on the mesh at one time.
struct HeatState {
    std::vector<double> grid;
    std::vector<double> values;
    double time = 0.0;
};

/// w(r) at one time, interpolated by cubic Lagrange polynomials.
class RadialProfile {
public:
    RadialProfile() = default;
    RadialProfile(const HeatState& state);

    double operator()(double r) const;
    double at_origin() const { return w_.front(); }
    double time() const { return time_; }
    const std::vector<double>& grid() const { return r_; }
    const std::vector<double>& values() const { return w_; }
    /// 4 pi int w r^2 dr (trapezoid).
    double mass() const;

    /// sup |w - w_half| / sup |w| under halved time steps; negative when not checked.
    double dt_change = -1.0;
    bool converged = true;

private:
    std::vector<double> r_;
    std::vector<double> w_;
    double time_ = 0.0;
};

/// Mesh with uniform width h on [0, max(2 R, fine_extent)], R a node,
/// geometric growth to h_far, then uniform to L.
std::vector<double> make_mesh(double support_radius, double L, double h, double h_far, double growth,
                              double fine_extent = 0.0);

/// p_beta(t, 0, .) at each of the increasing times.
std::vector<RadialProfile> evolve_point_source(const RadialPotential& v, double beta,
                                               const std::vector<double>& times, const StepperConfig& cfg = {});
RadialProfile evolve_point_source(const RadialPotential& v, double beta, double t, const StepperConfig& cfg = {});

/// Z_{beta,t}(.) at each of the increasing times; boundary forced to dirichlet_one.
std::vector<RadialProfile> partition_profiles(const RadialPotential& v, double beta,
                                              const std::vector<double>& times, const StepperConfig& cfg = {});
double partition_function(const RadialPotential& v, double beta, double t, double r, const StepperConfig& cfg = {});

struct ConvergenceRow {
    double parameter;  ///< T or eps
    double error;
};

struct ConvergenceTable {
    std::string parameter;  ///< "T" or "eps"
    std::vector<ConvergenceRow> rows;
    bool decreasing = false;
    std::vector<std::string> notes;
};

/// sup_x |Z_{beta(T), tT}(x sqrt T) - Zbar_{gamma(chi), t}(x)| for each T, beta(T) = beta_cr + chi / sqrt T.
ConvergenceTable verify_prop3(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                              const std::vector<double>& x_grid, const StepperConfig& cfg = {});

/// sup_x |T p_{beta(T)}(tT, 0, x sqrt T) - kappa psi(0) K(gamma, |x|, t) / |x|.
ConvergenceTable verify_prop1(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                              const std::vector<double>& x_grid, const StepperConfig& cfg = {});

/// Density of |omega(t H)| / sqrt(H) for the horizon-H polymer started at the
/// origin, from 4 pi r^2 p(tH, 0, r) Z_{H - tH}(r) / Z_H(0); grid in rescaled radius.
RadialDensity finite_potential_marginal(const RadialPotential& v, double beta, double t, double horizon,
                                        const std::vector<double>& grid, const StepperConfig& cfg = {});

/// Kolmogorov distance between the finite-eps marginal and the Q_gamma marginal for each eps.
ConvergenceTable verify_poten_family(double gamma, const std::vector<double>& eps_list, double t,
                                     const StepperConfig& cfg = {});

bool strictly_decreasing(const std::vector<ConvergenceRow>& rows);

std::string to_string(Boundary b);

}  // namespace polymer_lab::heatflow
