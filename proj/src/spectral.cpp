#include "polymer_lab/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "polymer_lab/special.hpp"

namespace polymer_lab::spectral {

namespace {

std::string format_number(double x) {
    std::ostringstream out;
    out.precision(12);
    out << x;
    return out.str();
}

}  // namespace

// --- RadialPotential -------------------------------------------------------

RadialPotential::RadialPotential(std::vector<double> grid, std::vector<double> values, double support_radius)
    : support_(support_radius) {
    if (grid.size() != values.size()) {
        throw PotentialError("potential: grid and values differ in length");
    }
    if (grid.size() < 2) {
        throw PotentialError("potential: at least two grid nodes are required");
    }
    if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
        throw PotentialError("potential: R_support must be positive and finite");
    }
    if (grid.front() != 0.0) {
        throw PotentialError("potential: grid must start at r = 0");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw PotentialError("potential: grid is not strictly increasing at row " + std::to_string(i + 1));
        }
        if (!std::isfinite(values[i])) {
            throw PotentialError("potential: non-finite value at row " + std::to_string(i + 1));
        }
        if (values[i] < 0.0) {
            throw PotentialError("potential: negative value " + format_number(values[i]) + " at r = " +
                                 format_number(grid[i]));
        }
    }
    // rows beyond the support must vanish and carry no information
    while (grid.size() > 2 && grid[grid.size() - 2] >= support_radius) {
        if (values.back() != 0.0) {
            throw PotentialError("potential: nonzero value beyond R_support at r = " + format_number(grid.back()));
        }
        grid.pop_back();
        values.pop_back();
    }
    if (grid.back() > support_radius) {
        if (values.back() != 0.0) {
            throw PotentialError("potential: nonzero value beyond R_support at r = " + format_number(grid.back()));
        }
        // the last segment crosses R_support: cut it there
        const std::size_t n = grid.size();
        const double w = (support_radius - grid[n - 2]) / (grid[n - 1] - grid[n - 2]);
        values[n - 1] = (1.0 - w) * values[n - 2];
        grid[n - 1] = support_radius;
    }
    if (std::all_of(values.begin(), values.end(), [](double x) { return x == 0.0; })) {
        throw PotentialError("potential: v vanishes identically");
    }
    grid_ = std::move(grid);
    values_ = std::move(values);
}

RadialPotential RadialPotential::ball(double eps, double gamma) {
    if (!(eps > 0.0) || !std::isfinite(eps) || !std::isfinite(gamma)) {
        throw PotentialError("ball: eps must be positive and gamma finite");
    }
    const double level = std::numbers::pi * std::numbers::pi / (8.0 * eps * eps) + gamma / eps;
    if (!(level > 0.0)) {
        throw PotentialError("ball: pi^2/(8 eps^2) + gamma/eps must be positive");
    }
    RadialPotential v({0.0, eps}, {level, level}, eps);
    v.label_ = "ball(" + format_number(eps) + "," + format_number(gamma) + ")";
    return v;
}

RadialPotential RadialPotential::triangle(double height, double radius) {
    if (!(height > 0.0) || !(radius > 0.0)) {
        throw PotentialError("triangle: height and radius must be positive");
    }
    RadialPotential v({0.0, radius}, {height, 0.0}, radius);
    v.label_ = "triangle(" + format_number(height) + "," + format_number(radius) + ")";
    return v;
}

double RadialPotential::operator()(double r) const {
    if (r < 0.0 || r > grid_.back()) {
        return 0.0;
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    if (it == grid_.end()) {
        return values_.back();
    }
    const auto i = static_cast<std::size_t>(it - grid_.begin());
    const double w = (r - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
    return (1.0 - w) * values_[i - 1] + w * values_[i];
}

double RadialPotential::integral(double a, double b) const {
    if (b < a) {
        return -integral(b, a);
    }
    a = std::max(a, 0.0);
    b = std::min(b, grid_.back());
    double total = 0.0;
    for (std::size_t i = 1; i < grid_.size() && a < b; ++i) {
        const double lo = std::max(a, grid_[i - 1]);
        const double hi = std::min(b, grid_[i]);
        if (hi <= lo) {
            continue;
        }
        const double slope = (values_[i] - values_[i - 1]) / (grid_[i] - grid_[i - 1]);
        const double v_lo = values_[i - 1] + slope * (lo - grid_[i - 1]);
        const double v_hi = values_[i - 1] + slope * (hi - grid_[i - 1]);
        total += 0.5 * (hi - lo) * (v_lo + v_hi);
    }
    return total;
}

RadialPotential RadialPotential::scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw PotentialError("potential: scale factor must be positive");
    }
    std::vector<double> values = values_;
    for (double& x : values) {
        x *= factor;
    }
    RadialPotential out(grid_, std::move(values), support_);
    out.label_ = format_number(factor) + "*" + label_;
    return out;
}

double RadialPotential::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

// --- zero-energy shooting --------------------------------------------------

namespace {

/// Integration segments: the potential grid plus, if the grid stops short,
/// a zero segment up to R_support. v is linear on each segment.
struct Segment {
    double a, b, va, vb;
    double at(double r) const { return va + (vb - va) * (r - a) / (b - a); }
};

std::vector<Segment> segments_of(const RadialPotential& v) {
    std::vector<Segment> out;
    const auto g = v.grid();
    const auto x = v.values();
    for (std::size_t i = 1; i < g.size(); ++i) {
        out.push_back({g[i - 1], g[i], x[i - 1], x[i]});
    }
    if (g.back() < v.support_radius()) {
        out.push_back({g.back(), v.support_radius(), 0.0, 0.0});
    }
    return out;
}

using State = std::array<double, 4>;  // u, u', int v u r, int v u^2

struct Trajectory {
    std::vector<double> r, u, du;
    ZeroEnergyShot shot;
};

Trajectory integrate(const RadialPotential& v, double beta, int steps, bool keep) {
    if (steps < 16) {
        throw std::invalid_argument("shooting: at least 16 steps are required");
    }
    const double R = v.support_radius();
    State y{0.0, 1.0, 0.0, 0.0};
    Trajectory out;
    if (keep) {
        out.r.push_back(0.0);
        out.u.push_back(0.0);
        out.du.push_back(1.0);
    }
    int sign_changes = 0;
    for (const Segment& seg : segments_of(v)) {
        const int n = std::max(1, static_cast<int>(std::ceil(steps * (seg.b - seg.a) / R)));
        const double h = (seg.b - seg.a) / n;
        auto rhs = [&](double r, const State& s) {
            const double pot = seg.at(r);
            return State{s[1], -2.0 * beta * pot * s[0], pot * s[0] * r, pot * s[0] * s[0]};
        };
        for (int k = 0; k < n; ++k) {
            const double r = seg.a + k * h;
            const State k1 = rhs(r, y);
            State tmp;
            for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
            const State k2 = rhs(r + 0.5 * h, tmp);
            for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
            const State k3 = rhs(r + 0.5 * h, tmp);
            for (int j = 0; j < 4; ++j) tmp[j] = y[j] + h * k3[j];
            const State k4 = rhs(r + h, tmp);
            const double previous = y[0];
            for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            if ((previous > 0.0 && y[0] <= 0.0) || (previous < 0.0 && y[0] >= 0.0)) {
                ++sign_changes;
            }
            if (keep) {
                out.r.push_back(k + 1 == n ? seg.b : r + h);
                out.u.push_back(y[0]);
                out.du.push_back(y[1]);
            }
        }
    }
    out.shot = {y[0], y[1], sign_changes, y[2], y[3]};
    return out;
}

/// Past the first zero-energy resonance: the Pruefer angle of (u', u) at
/// R_support exceeds pi/2. The angle is increasing in both r and beta.
bool past_resonance(const ZeroEnergyShot& s) { return s.interior_nodes > 0 || s.du_end <= 0.0; }

}  // namespace

ZeroEnergyShot shoot_zero_energy(const RadialPotential& v, double beta, int steps) {
    return integrate(v, beta, steps, false).shot;
}

double critical_beta(const RadialPotential& v, const ShootingConfig& cfg) {
    const double R = v.support_radius();
    // any bound state needs beta int v r dr of order one
    double lo = std::max(cfg.beta_lo, 0.25 / (v.max_value() * R * R));
    if (past_resonance(shoot_zero_energy(v, lo, cfg.steps))) {
        lo = cfg.beta_lo;
        if (past_resonance(shoot_zero_energy(v, lo, cfg.steps))) {
            throw SpectralError("critical_beta: already past the resonance at beta = " + format_number(lo) +
                                "; lower beta_lo");
        }
    }
    double hi = 2.0 * lo;
    while (!past_resonance(shoot_zero_energy(v, hi, cfg.steps))) {
        lo = hi;
        hi *= 2.0;
        if (hi > cfg.beta_hi) {
            const ZeroEnergyShot s = shoot_zero_energy(v, cfg.beta_hi, cfg.steps);
            std::ostringstream msg;
            msg << "critical_beta: no sign change of u'(R) in [" << cfg.beta_lo << ", " << cfg.beta_hi
                << "]; at beta_hi u(R) = " << s.u_end << ", u'(R) = " << s.du_end;
            throw SpectralError(msg.str());
        }
    }
    while (hi - lo > cfg.rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (past_resonance(shoot_zero_energy(v, mid, cfg.steps)) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// --- ground state ----------------------------------------------------------

GroundState::GroundState(std::vector<double> r, std::vector<double> u, std::vector<double> du)
    : r_(std::move(r)), u_(std::move(u)), du_(std::move(du)) {
    if (r_.size() < 2 || r_.size() != u_.size() || r_.size() != du_.size()) {
        throw std::invalid_argument("GroundState: inconsistent samples");
    }
    scale_ = 1.0 / u_.back();
}

double GroundState::operator()(double r) const {
    if (r <= 0.0) {
        return at_origin();
    }
    const double R = r_.back();
    if (r >= R) {
        return 1.0 / r;
    }
    auto it = std::upper_bound(r_.begin(), r_.end(), r);
    const auto i = static_cast<std::size_t>(it - r_.begin());
    const double h = r_[i] - r_[i - 1];
    const double s = (r - r_[i - 1]) / h;
    // cubic Hermite in (u, u')
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    const double u = h00 * u_[i - 1] + h10 * h * du_[i - 1] + h01 * u_[i] + h11 * h * du_[i];
    return scale_ * u / r;
}

std::vector<std::pair<double, double>> GroundState::samples(double outer, int exterior_points, int stride) const {
    std::vector<std::pair<double, double>> out;
    stride = std::max(stride, 1);
    out.emplace_back(0.0, at_origin());
    for (std::size_t i = stride; i < r_.size(); i += stride) {
        out.emplace_back(r_[i], scale_ * u_[i] / r_[i]);
    }
    const double R = r_.back();
    if (out.back().first != R) {
        out.emplace_back(R, 1.0 / R);
    }
    for (int k = 1; k <= exterior_points && outer > R; ++k) {
        const double r = R + (outer - R) * k / exterior_points;
        out.emplace_back(r, 1.0 / r);
    }
    return out;
}

GroundState ground_state_psi(const RadialPotential& v, double beta_cr, int steps) {
    Trajectory tr = integrate(v, beta_cr, steps, true);
    if (tr.shot.interior_nodes > 0) {
        throw SpectralError("ground_state_psi: zero-energy solution has " +
                            std::to_string(tr.shot.interior_nodes) +
                            " interior node(s); beta is beyond the first critical coupling");
    }
    if (!(tr.shot.u_end > 0.0)) {
        throw SpectralError("ground_state_psi: u(R_support) is not positive");
    }
    return GroundState(std::move(tr.r), std::move(tr.u), std::move(tr.du));
}

namespace {

/// 4 pi int_0^R f(r) r^2 dr split at the potential knots, GL16 on sub-panels.
template <class F>
double radial_integral(const RadialPotential& v, F&& f, int panels_per_segment = 32) {
    double total = 0.0;
    for (const Segment& seg : segments_of(v)) {
        total += integrate_gl([&](double r) { return f(r) * r * r; }, seg.a, seg.b, panels_per_segment);
    }
    return 4.0 * std::numbers::pi * total;
}

}  // namespace

double integral_v_psi(const RadialPotential& v, const GroundState& psi) {
    return radial_integral(v, [&](double r) { return v(r) * psi(r); });
}

double integral_v_psi_sq(const RadialPotential& v, const GroundState& psi) {
    return radial_integral(v, [&](double r) {
        const double p = psi(r);
        return v(r) * p * p;
    });
}

double gamma1(const RadialPotential& v, const GroundState& psi) {
    const double a = integral_v_psi(v, psi);
    const double b = integral_v_psi_sq(v, psi);
    if (!(b > 1e-300) || !std::isfinite(a)) {
        throw SpectralError("gamma1: degenerate potential (int v psi^2 vanishes)");
    }
    return a * a / (std::numbers::sqrt2 * std::numbers::pi * b);
}

// --- finite-difference eigensolve ------------------------------------------

namespace {

/// Symmetric tridiagonal form of (1/2) d^2/dr^2 + beta v on a non-uniform
/// mesh with Dirichlet ends, lumped mass. diag holds the kinetic part and
/// pot the cell-averaged potential so beta can vary without a rebuild.
struct Tridiagonal {
    std::vector<long double> kinetic;
    std::vector<long double> pot;
    std::vector<long double> off_sq;
    double length = 0.0;
};

std::vector<double> eigen_mesh(const RadialPotential& v, double L, double h_max, const EigenConfig& cfg) {
    const double R = v.support_radius();
    const double inner = std::max(4.0, 4.0 * R);
    const int nR = std::max(4, static_cast<int>(std::lround(R / (inner / cfg.interior_cells))));
    const double h0 = R / nR;
    std::vector<double> mesh;
    const int n_inner = static_cast<int>(std::lround(inner / h0));
    for (int i = 0; i <= n_inner; ++i) {
        mesh.push_back(i * h0);
    }
    double r = mesh.back();
    double h = h0;
    h_max = std::max(h_max, h0);
    while (r < L) {
        h = std::min(h * cfg.growth, h_max);
        r += h;
        mesh.push_back(r);
    }
    return mesh;
}

Tridiagonal assemble(const RadialPotential& v, const std::vector<double>& mesh) {
    const std::size_t n = mesh.size() - 2;  // interior unknowns
    Tridiagonal m;
    m.kinetic.resize(n);
    m.pot.resize(n);
    m.off_sq.resize(n > 0 ? n - 1 : 0);
    m.length = mesh.back();
    std::vector<long double> mass(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = k + 1;
        const long double hl = mesh[i] - mesh[i - 1];
        const long double hr = mesh[i + 1] - mesh[i];
        mass[k] = 0.5L * (hl + hr);
        m.kinetic[k] = -0.5L * (1.0L / hl + 1.0L / hr) / mass[k];
        const double a = mesh[i] - 0.5 * static_cast<double>(hl);
        const double b = mesh[i] + 0.5 * static_cast<double>(hr);
        m.pot[k] = v.integral(a, b) / mass[k];
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const long double h = mesh[k + 2] - mesh[k + 1];
        const long double b = 0.5L / h;
        m.off_sq[k] = b * b / (mass[k] * mass[k + 1]);
    }
    return m;
}

/// Number of eigenvalues strictly above x (Sturm count of LDL^T of A - x).
std::size_t count_above(const Tridiagonal& m, double beta, long double x) {
    std::size_t count = 0;
    long double d = 1.0L;
    const long double tiny = 1e-4000L;
    for (std::size_t k = 0; k < m.kinetic.size(); ++k) {
        d = m.kinetic[k] + beta * m.pot[k] - x - (k > 0 ? m.off_sq[k - 1] / d : 0.0L);
        if (d == 0.0L) {
            d = tiny;
        }
        if (d > 0.0L) {
            ++count;
        }
    }
    return count;
}

/// Top eigenvalue if positive, else 0.
long double top_eigenvalue(const Tridiagonal& m, double beta) {
    if (count_above(m, beta, 0.0L) == 0) {
        return 0.0L;
    }
    long double lo = 0.0L;
    long double hi = 0.0L;
    for (std::size_t k = 0; k < m.kinetic.size(); ++k) {
        long double radius = 0.0L;
        if (k > 0) radius += std::sqrt(m.off_sq[k - 1]);
        if (k + 1 < m.kinetic.size()) radius += std::sqrt(m.off_sq[k]);
        hi = std::max(hi, m.kinetic[k] + beta * m.pot[k] + radius);
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-16L * hi; ++iter) {
        const long double mid = 0.5L * (lo + hi);
        (count_above(m, beta, mid) > 0 ? lo : hi) = mid;
    }
    return 0.5L * (lo + hi);
}

bool has_bound_state(const RadialPotential& v, double beta) {
    const ZeroEnergyShot s = shoot_zero_energy(v, beta);
    if (s.interior_nodes > 0) {
        return true;
    }
    // exterior continuation u(R) + u'(R)(r - R) reaches zero iff u'(R) < 0
    return s.du_end * v.support_radius() < -1e-9 * std::fabs(s.u_end);
}

double decay_domain(const RadialPotential& v, double kappa, const EigenConfig& cfg) {
    return v.support_radius() + 1.2 * cfg.decay_lengths / kappa;
}

}  // namespace

EigenResult principal_eigenvalue(const RadialPotential& v, double beta, const EigenConfig& cfg) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("principal_eigenvalue: beta must be positive");
    }
    EigenResult result;
    if (!has_bound_state(v, beta)) {
        result.status = EigenStatus::absent;
        return result;
    }
    const double R = v.support_radius();
    double L = 64.0 * std::max(1.0, R);
    double kappa = 0.0;
    for (int attempt = 0; attempt < 40; ++attempt) {
        const double h_max = kappa > 0.0 ? 0.02 / kappa : L / 512.0;
        const std::vector<double> mesh = eigen_mesh(v, L, h_max, cfg);
        const Tridiagonal m = assemble(v, mesh);
        const long double lambda = top_eigenvalue(m, beta);
        result.domain_length = mesh.back();
        result.grid_points = static_cast<int>(mesh.size());
        if (lambda <= 0.0L) {
            L *= 8.0;
            if (L > 1e9) {
                break;
            }
            continue;
        }
        const double previous_kappa = kappa;
        kappa = std::sqrt(2.0 * static_cast<double>(lambda));
        result.value = static_cast<double>(lambda);
        if (kappa * (L - R) >= cfg.decay_lengths && previous_kappa > 0.0 &&
            std::fabs(kappa - previous_kappa) <= 1e-3 * kappa) {
            break;
        }
        L = std::max(L, decay_domain(v, kappa, cfg));
    }
    if (result.value < cfg.zero_tol) {
        result.status = EigenStatus::indeterminate;
        return result;
    }
    result.status = EigenStatus::present;
    return result;
}

double beta0_of_lambda(const RadialPotential& v, double lambda, double beta_cr, const EigenConfig& cfg) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("beta0_of_lambda: lambda must be positive");
    }
    // the eigenfunction at the target decays like e^{-kappa r}; fix the box once
    const double kappa = std::sqrt(2.0 * lambda);
    const std::vector<double> mesh = eigen_mesh(v, decay_domain(v, kappa, cfg), 0.02 / kappa, cfg);
    const Tridiagonal m = assemble(v, mesh);
    const auto above = [&](double beta) { return count_above(m, beta, lambda) > 0; };
    double lo = beta_cr;
    double step = 0.05 * beta_cr;
    double hi = beta_cr + step;
    while (!above(hi)) {
        lo = hi;
        step *= 2.0;
        hi = beta_cr + step;
        if (step > 1e6 * beta_cr) {
            throw SpectralError("beta0_of_lambda: no bracket for lambda = " + format_number(lambda));
        }
    }
    if (above(lo)) {
        throw SpectralError("beta0_of_lambda: lambda_0(beta_cr) already exceeds lambda = " +
                            format_number(lambda) + "; grid too coarse");
    }
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        (above(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double beta0_of_lambda(const RadialPotential& v, double lambda) {
    return beta0_of_lambda(v, lambda, critical_beta(v));
}

ExpansionFit gamma1_via_expansion(const RadialPotential& v, std::vector<double> lambdas) {
    if (lambdas.size() < 4) {
        throw std::invalid_argument("gamma1_via_expansion: at least four lambda values are required");
    }
    const double beta_cr = critical_beta(v);
    ExpansionFit fit{};
    fit.lambdas = lambdas;
    // normal equations for y = a + s sqrt(lambda) + b lambda
    std::array<std::array<double, 3>, 3> A{};
    std::array<double, 3> rhs{};
    for (double lambda : lambdas) {
        const double y = 1.0 / beta0_of_lambda(v, lambda, beta_cr);
        fit.inverse_beta.push_back(y);
        const std::array<double, 3> phi{1.0, std::sqrt(lambda), lambda};
        for (int i = 0; i < 3; ++i) {
            rhs[i] += phi[i] * y;
            for (int j = 0; j < 3; ++j) {
                A[i][j] += phi[i] * phi[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::fabs(A[r][col]) > std::fabs(A[pivot][col])) pivot = r;
        }
        std::swap(A[col], A[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::array<double, 3> coef{};
    for (int r = 2; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < 3; ++c) s -= A[r][c] * coef[c];
        coef[r] = s / A[r][r];
    }
    double mean = 0.0;
    for (double y : fit.inverse_beta) mean += y;
    mean /= static_cast<double>(fit.inverse_beta.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double model = coef[0] + coef[1] * std::sqrt(lambdas[k]) + coef[2] * lambdas[k];
        ss_res += std::pow(fit.inverse_beta[k] - model, 2);
        ss_tot += std::pow(fit.inverse_beta[k] - mean, 2);
    }
    fit.intercept = coef[0];
    fit.gamma1 = -coef[1];
    fit.linear = coef[2];
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    if (fit.r_squared < 0.999) {
        throw FitError("gamma1_via_expansion: poor fit, R^2 = " + format_number(fit.r_squared));
    }
    return fit;
}

PowerLawFit eigenvalue_power_law(const RadialPotential& v, double beta_cr, std::vector<double> deltas) {
    if (deltas.size() < 2) {
        throw std::invalid_argument("eigenvalue_power_law: at least two offsets are required");
    }
    PowerLawFit fit{};
    fit.deltas = deltas;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, num = 0.0, den = 0.0;
    for (double d : deltas) {
        const EigenResult e = principal_eigenvalue(v, beta_cr + d);
        if (e.status != EigenStatus::present) {
            throw SpectralError("eigenvalue_power_law: no eigenvalue at beta_cr + " + format_number(d));
        }
        fit.eigenvalues.push_back(e.value);
        const double x = std::log(d);
        const double y = std::log(e.value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        num += e.value * d * d;
        den += d * d * d * d;
    }
    const double n = static_cast<double>(deltas.size());
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.coefficient = num / den;
    return fit;
}

SpectralSummary summarize(const RadialPotential& v, const ShootingConfig& cfg) {
    const double beta_cr = critical_beta(v, cfg);
    GroundState psi = ground_state_psi(v, beta_cr, cfg.steps);
    const double a = integral_v_psi(v, psi);
    const double b = integral_v_psi_sq(v, psi);
    if (!(b > 1e-300)) {
        throw SpectralError("summarize: degenerate potential (int v psi^2 vanishes)");
    }
    const double g1 = a * a / (std::numbers::sqrt2 * std::numbers::pi * b);
    return SpectralSummary{beta_cr,
                           std::move(psi),
                           g1,
                           1.0 / (beta_cr * a),
                           std::numbers::sqrt2 / (beta_cr * beta_cr * g1),
                           a,
                           b};
}

double gamma_of_chi(const SpectralSummary& s, double chi) { return s.c * chi; }

double alpha_of_f(const SpectralSummary& s, const RadialFunction& f) {
    if (f.empty()) {
        return 0.0;
    }
    const auto g = f.grid();
    const double R = s.psi.support_radius();
    double total = 0.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        auto piece = [&](double a, double b) {
            return integrate_gl([&](double r) { return s.psi(r) * f(r) * r * r; }, a, b, 2);
        };
        if (g[i - 1] < R && R < g[i]) {
            total += piece(g[i - 1], R) + piece(R, g[i]);
        } else {
            total += piece(g[i - 1], g[i]);
        }
    }
    return s.kappa * 4.0 * std::numbers::pi * total;
}

std::string to_string(EigenStatus status) {
    switch (status) {
        case EigenStatus::present:
            return "present";
        case EigenStatus::absent:
            return "absent";
        case EigenStatus::indeterminate:
            return "indeterminate";
    }
    return "unknown";
}

}  // namespace polymer_lab::spectral
