#include "polymer_lab/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "polymer_lab/special.hpp"
#include "polymer_lab/zerorange.hpp"

namespace polymer_lab::heatflow {

namespace {

constexpr std::size_t kMaxNodes = 2'000'000;

/// Tridiagonal M^{-1}(-S) + beta V for interior nodes 1..N-1 of the mesh.
struct Operator {
    std::vector<double> lower, diag, upper;
    double boundary_coef = 0.0;  // multiplies u_N in the last row
};

Operator assemble(const RadialPotential& v, double beta, const std::vector<double>& r) {
    const std::size_t n = r.size() - 2;
    Operator op;
    op.lower.resize(n);
    op.diag.resize(n);
    op.upper.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = k + 1;
        const double hl = r[i] - r[i - 1];
        const double hr = r[i + 1] - r[i];
        const double m = 0.5 * (hl + hr);
        op.lower[k] = 0.5 / (hl * m);
        op.upper[k] = 0.5 / (hr * m);
        const double cell = v.integral(r[i] - 0.5 * hl, r[i] + 0.5 * hr) / m;
        op.diag[k] = -(op.lower[k] + op.upper[k]) + beta * cell;
    }
    op.boundary_coef = op.upper[n - 1];
    return op;
}

/// One theta-step of du/dt = A u with u_0 = 0 and u_N = boundary fixed.
void theta_step(const Operator& op, std::vector<double>& u, double boundary, double dt, double theta,
                std::vector<double>& rhs, std::vector<double>& c_prime) {
    const std::size_t n = op.diag.size();
    for (std::size_t k = 0; k < n; ++k) {
        double au = op.diag[k] * u[k + 1];
        if (k > 0) au += op.lower[k] * u[k];
        if (k + 1 < n) au += op.upper[k] * u[k + 2];
        rhs[k] = u[k + 1] + (1.0 - theta) * dt * au;
    }
    rhs[n - 1] += dt * op.boundary_coef * boundary;
    // Thomas algorithm on (I - theta dt A)
    double denom = 1.0 - theta * dt * op.diag[0];
    c_prime[0] = -theta * dt * op.upper[0] / denom;
    rhs[0] /= denom;
    for (std::size_t k = 1; k < n; ++k) {
        const double a = -theta * dt * op.lower[k];
        denom = 1.0 - theta * dt * op.diag[k] - a * c_prime[k - 1];
        c_prime[k] = k + 1 < n ? -theta * dt * op.upper[k] / denom : 0.0;
        rhs[k] = (rhs[k] - a * rhs[k - 1]) / denom;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        rhs[k] -= c_prime[k] * rhs[k + 1];
    }
    for (std::size_t k = 0; k < n; ++k) {
        u[k + 1] = rhs[k];
    }
    u.back() = boundary;
}

std::vector<HeatState> march(const Operator& op, const std::vector<double>& mesh, std::vector<double> u,
                             double t_start, const std::vector<double>& times, double boundary,
                             const StepperConfig& cfg, double dt_scale) {
    std::vector<double> rhs(op.diag.size());
    std::vector<double> c_prime(op.diag.size());
    std::vector<HeatState> out;
    double t = t_start;
    int steps = 0;
    const double cap = cfg.dt > 0.0 ? cfg.dt : std::numeric_limits<double>::infinity();
    for (double target : times) {
        while (t < target * (1.0 - 1e-14)) {
            double dt = std::min(cap, std::max(cfg.dt_rel * t, cfg.dt_min)) * dt_scale;
            if (t + dt > target || target - (t + dt) < 0.25 * dt) {
                dt = target - t;
            }
            const double theta = steps < cfg.rannacher_steps ? 1.0 : 0.5;
            theta_step(op, u, boundary, dt, theta, rhs, c_prime);
            t += dt;
            ++steps;
        }
        t = target;
        out.push_back({mesh, u, target});
    }
    return out;
}

void check_times(const std::vector<double>& times, double t_start, const char* who) {
    if (times.empty()) {
        throw std::invalid_argument(std::string(who) + ": no output times");
    }
    double prev = t_start;
    for (double t : times) {
        if (!(t > prev) || !std::isfinite(t)) {
            std::ostringstream msg;
            msg << who << ": output times must be increasing and exceed " << t_start;
            throw std::invalid_argument(msg.str());
        }
        prev = t;
    }
}

struct Layout {
    std::vector<double> mesh;
    double t0 = 0.0;
};

Layout layout(const RadialPotential& v, double t_max, const StepperConfig& cfg, bool point_source) {
    const double R = v.support_radius();
    Layout out;
    out.t0 = std::min(cfg.t0, 0.01 * R * R);
    double h = std::min(cfg.h, R / 16.0);
    double fine_extent = 0.0;
    if (point_source) {
        h = std::min(h, std::sqrt(out.t0) / 8.0);
        fine_extent = 10.0 * std::sqrt(out.t0);
    }
    const double root = std::sqrt(t_max);
    const double L = cfg.L > 0.0 ? cfg.L : R + 10.0 * root + 2.0;
    if (L < 4.0 * root) {
        std::ostringstream msg;
        msg << "stepper: L = " << L << " is below 4 sqrt(t_max) = " << 4.0 * root;
        throw std::invalid_argument(msg.str());
    }
    const double h_far = cfg.h_far > 0.0 ? cfg.h_far : std::max(0.005 * root, h);
    out.mesh = make_mesh(R, L, h, h_far, cfg.growth, fine_extent);
    return out;
}

double origin_value(const std::vector<double>& r, const std::vector<double>& w) {
    // w is even in r: fit a + b r^2 through the first two interior nodes
    const double r1 = r[1] * r[1];
    const double r2 = r[2] * r[2];
    return (r2 * w[1] - r1 * w[2]) / (r2 - r1);
}

double max_relative_change(const RadialProfile& a, const RadialProfile& b) {
    double peak = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        peak = std::max(peak, std::fabs(a.values()[i]));
        worst = std::max(worst, std::fabs(a.values()[i] - b.values()[i]));
    }
    return peak > 0.0 ? worst / peak : 0.0;
}

std::vector<RadialProfile> to_profiles(const std::vector<HeatState>& states) {
    std::vector<RadialProfile> out;
    for (const auto& s : states) {
        out.emplace_back(s);
    }
    return out;
}

std::vector<RadialProfile> run_point_source(const RadialPotential& v, double beta, const std::vector<double>& times,
                                            const StepperConfig& cfg, double dt_scale) {
    const Layout lay = layout(v, times.back(), cfg, true);
    check_times(times, lay.t0, "evolve_point_source");
    const auto& r = lay.mesh;
    // free kernel at t0 times the potential averaged along the straight bridge
    std::vector<double> u(r.size(), 0.0);
    const double norm = std::pow(2.0 * std::numbers::pi * lay.t0, -1.5);
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        const double mean_v = v.integral(0.0, r[i]) / r[i];
        u[i] = r[i] * norm * std::exp(-r[i] * r[i] / (2.0 * lay.t0) + beta * lay.t0 * mean_v);
    }
    const Operator op = assemble(v, beta, r);
    return to_profiles(march(op, r, std::move(u), lay.t0, times, 0.0, cfg, dt_scale));
}

std::vector<RadialProfile> run_partition(const RadialPotential& v, double beta, const std::vector<double>& times,
                                         const StepperConfig& cfg, double dt_scale) {
    check_times(times, 0.0, "partition_profiles");
    const Layout lay = layout(v, times.back(), cfg, false);
    const auto& r = lay.mesh;
    const Operator op = assemble(v, beta, r);
    return to_profiles(march(op, r, r, 0.0, times, r.back(), cfg, dt_scale));
}

template <class Run>
std::vector<RadialProfile> with_dt_check(Run&& run, const StepperConfig& cfg) {
    auto profiles = run(1.0);
    if (cfg.check_dt) {
        const auto halved = run(0.5);
        for (std::size_t k = 0; k < profiles.size(); ++k) {
            profiles[k].dt_change = max_relative_change(halved[k], profiles[k]);
            profiles[k].converged = profiles[k].dt_change <= 1e-3;
        }
    }
    return profiles;
}

}  // namespace

RadialProfile::RadialProfile(const HeatState& state) : r_(state.grid), time_(state.time) {
    if (r_.size() < 4) {
        throw std::invalid_argument("RadialProfile: at least four nodes are required");
    }
    w_.resize(r_.size());
    for (std::size_t i = 1; i < r_.size(); ++i) {
        w_[i] = state.values[i] / r_[i];
    }
    w_[0] = origin_value(r_, w_);
}

double RadialProfile::operator()(double r) const {
    if (r <= 0.0) {
        return w_.front();
    }
    if (r >= r_.back()) {
        return w_.back();
    }
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - r_.begin()) - 1;
    // stencil i-1 .. i+2, shifted inside the mesh
    std::size_t first = i == 0 ? 0 : i - 1;
    first = std::min(first, r_.size() - 4);
    double value = 0.0;
    for (std::size_t a = first; a < first + 4; ++a) {
        double basis = 1.0;
        for (std::size_t b = first; b < first + 4; ++b) {
            if (b != a) basis *= (r - r_[b]) / (r_[a] - r_[b]);
        }
        value += basis * w_[a];
    }
    return value;
}

double RadialProfile::mass() const {
    std::vector<double> f(r_.size());
    for (std::size_t i = 0; i < r_.size(); ++i) {
        f[i] = w_[i] * r_[i] * r_[i];
    }
    return 4.0 * std::numbers::pi * trapezoid(r_, f);
}

std::vector<double> make_mesh(double support_radius, double L, double h, double h_far, double growth,
                              double fine_extent) {
    if (!(h > 0.0) || !(h_far >= h) || !(growth > 1.0) || !(L > support_radius)) {
        throw std::invalid_argument("make_mesh: need 0 < h <= h_far, growth > 1 and L > R_support");
    }
    const double R = support_radius;
    const double cells_in_support = std::ceil(R / h - 1e-9);
    const double hf = R / cells_in_support;
    const double fine_end = std::max(2.0 * R, fine_extent);
    const double estimate = fine_end / hf + std::log(h_far / hf) / std::log(growth) + L / h_far;
    if (estimate > static_cast<double>(kMaxNodes)) {
        throw std::invalid_argument("make_mesh: mesh would need more than 2e6 nodes; potential unresolved");
    }
    std::vector<double> mesh;
    for (int i = 0; i * hf <= fine_end * (1.0 + 1e-12); ++i) {
        mesh.push_back(i * hf);
    }
    double step = hf;
    while (mesh.back() < L) {
        step = std::min(step * growth, h_far);
        mesh.push_back(mesh.back() + step);
    }
    // end exactly at L; merge a sliver cell into its neighbour
    if (mesh.size() > 2 && L - mesh[mesh.size() - 2] < 0.5 * step) {
        mesh.pop_back();
    }
    mesh.back() = L;
    return mesh;
}

std::vector<RadialProfile> evolve_point_source(const RadialPotential& v, double beta, const std::vector<double>& times,
                                               const StepperConfig& cfg) {
    return with_dt_check([&](double s) { return run_point_source(v, beta, times, cfg, s); }, cfg);
}

RadialProfile evolve_point_source(const RadialPotential& v, double beta, double t, const StepperConfig& cfg) {
    return evolve_point_source(v, beta, std::vector<double>{t}, cfg).front();
}

std::vector<RadialProfile> partition_profiles(const RadialPotential& v, double beta, const std::vector<double>& times,
                                              const StepperConfig& cfg) {
    return with_dt_check([&](double s) { return run_partition(v, beta, times, cfg, s); }, cfg);
}

double partition_function(const RadialPotential& v, double beta, double t, double r, const StepperConfig& cfg) {
    if (!(r >= 0.0)) {
        throw std::invalid_argument("partition_function: r must be non-negative");
    }
    if (t == 0.0) {
        return 1.0;
    }
    return partition_profiles(v, beta, std::vector<double>{t}, cfg).front()(r);
}

bool strictly_decreasing(const std::vector<ConvergenceRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(rows[i].error < rows[i - 1].error)) {
            return false;
        }
    }
    return rows.size() >= 2;
}

namespace {

double window_beta(const spectral::SpectralSummary& s, double chi, double T) {
    const double beta = s.beta_cr + chi / std::sqrt(T);
    if (!(beta > 0.0)) {
        std::ostringstream msg;
        msg << "beta(T) = " << beta << " is not positive at T = " << T;
        throw std::invalid_argument(msg.str());
    }
    return beta;
}

void check_T_list(const std::vector<double>& T_list, double t, const std::vector<double>& x_grid) {
    check_times(T_list, 0.0, "verify");
    if (!(t > 0.0) || !(t <= 1.0)) {
        throw std::invalid_argument("verify: t must lie in (0, 1]");
    }
    if (x_grid.empty() || std::any_of(x_grid.begin(), x_grid.end(), [](double x) { return !(x > 0.0); })) {
        throw std::invalid_argument("verify: x grid must be non-empty with positive radii");
    }
}

void note_convergence(ConvergenceTable& table, double T, const RadialProfile& p) {
    if (p.dt_change >= 0.0 && !p.converged) {
        std::ostringstream msg;
        msg << "T=" << T << ": halving dt changed the solution by " << p.dt_change;
        table.notes.push_back(msg.str());
    }
}

}  // namespace

ConvergenceTable verify_prop3(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                              const std::vector<double>& x_grid, const StepperConfig& cfg) {
    check_T_list(T_list, t, x_grid);
    const spectral::SpectralSummary s = spectral::summarize(v);
    const auto zr = zerorange::ZeroRangeParams::make(spectral::gamma_of_chi(s, chi));
    std::vector<double> limit;
    for (double x : x_grid) {
        limit.push_back(zerorange::zbar_radius(zr, t, x));
    }
    ConvergenceTable table{"T", {}, false, {}};
    for (double T : T_list) {
        const RadialProfile Z = partition_profiles(v, window_beta(s, chi, T), {t * T}, cfg).front();
        note_convergence(table, T, Z);
        double err = 0.0;
        for (std::size_t k = 0; k < x_grid.size(); ++k) {
            err = std::max(err, std::fabs(Z(x_grid[k] * std::sqrt(T)) - limit[k]));
        }
        table.rows.push_back({T, err});
    }
    table.decreasing = strictly_decreasing(table.rows);
    return table;
}

ConvergenceTable verify_prop1(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                              const std::vector<double>& x_grid, const StepperConfig& cfg) {
    check_T_list(T_list, t, x_grid);
    const spectral::SpectralSummary s = spectral::summarize(v);
    const auto zr = zerorange::ZeroRangeParams::make(spectral::gamma_of_chi(s, chi));
    const double prefactor = s.kappa * s.psi.at_origin();
    std::vector<double> limit;
    for (double x : x_grid) {
        limit.push_back(prefactor * zerorange::kernel(zr, x, t) / x);
    }
    ConvergenceTable table{"T", {}, false, {}};
    for (double T : T_list) {
        const RadialProfile p = evolve_point_source(v, window_beta(s, chi, T), t * T, cfg);
        note_convergence(table, T, p);
        double err = 0.0;
        for (std::size_t k = 0; k < x_grid.size(); ++k) {
            err = std::max(err, std::fabs(T * p(x_grid[k] * std::sqrt(T)) - limit[k]));
        }
        table.rows.push_back({T, err});
    }
    table.decreasing = strictly_decreasing(table.rows);
    return table;
}

RadialDensity finite_potential_marginal(const RadialPotential& v, double beta, double t, double horizon,
                                        const std::vector<double>& grid, const StepperConfig& cfg) {
    if (!(t > 0.0) || !(t <= 1.0) || !(horizon > 0.0)) {
        throw std::invalid_argument("finite_potential_marginal: need t in (0, 1] and a positive horizon");
    }
    const double s = t * horizon;
    const double root = std::sqrt(horizon);
    const RadialProfile p = evolve_point_source(v, beta, s, cfg);
    std::vector<double> z_times;
    if (t < 1.0) z_times.push_back(horizon - s);
    z_times.push_back(horizon);
    const auto Z = partition_profiles(v, beta, z_times, cfg);
    const double z_total = Z.back().at_origin();
    std::vector<double> density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i] * root;
        const double weight = t < 1.0 ? Z.front()(r) : 1.0;
        density[i] = 4.0 * std::numbers::pi * r * r * p(r) * weight / z_total * root;
    }
    return RadialDensity(grid, std::move(density));
}

ConvergenceTable verify_poten_family(double gamma, const std::vector<double>& eps_list, double t,
                                     const StepperConfig& cfg) {
    if (eps_list.size() < 2) {
        throw std::invalid_argument("verify_poten_family: need at least two eps values");
    }
    for (std::size_t i = 1; i < eps_list.size(); ++i) {
        if (!(eps_list[i] < eps_list[i - 1])) {
            throw std::invalid_argument("verify_poten_family: eps values must be decreasing");
        }
    }
    const std::vector<double> grid = geometric_linear_grid(6.0, 2048);
    const RadialDensity model = zerorange::marginal_radial(zerorange::ZeroRangeParams::make(gamma), t, grid);
    ConvergenceTable table{"eps", {}, false, {}};
    for (double eps : eps_list) {
        StepperConfig c = cfg;
        c.h = std::min(cfg.h, eps / 16.0);
        const RadialPotential v = RadialPotential::ball(eps, gamma);
        const RadialDensity finite = finite_potential_marginal(v, 1.0, t, 1.0, grid, c);
        double dist = 0.0;
        for (double r : grid) {
            dist = std::max(dist, std::fabs(finite.cdf(r) - model.cdf(r)));
        }
        table.rows.push_back({eps, dist});
    }
    table.decreasing = strictly_decreasing(table.rows);
    return table;
}

std::string to_string(Boundary b) { return b == Boundary::dirichlet_zero ? "dirichlet_zero" : "dirichlet_one"; }

}  // namespace polymer_lab::heatflow
