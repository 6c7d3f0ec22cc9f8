#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polymer_lab/heatflow.hpp"
#include "polymer_lab/spectral.hpp"
#include "polymer_lab/zerorange.hpp"

/// Brownian paths reweighted by e^{beta int v}, self-normalized estimators
/// of one-time radial marginals, and the finite-T convergence checks.
namespace polymer_lab::montecarlo {

using spectral::RadialPotential;
using zerorange::Point;

/// wiener: free Gaussian increments. guided: increments drift along
/// grad log Z_{T-s}, with the Girsanov factor folded into the log-weight so
/// the self-normalized target is unchanged.
enum class Proposal { wiener, guided };
std::string to_string(Proposal p);

/// d/dr log Z_{beta,tau}(r) on a uniform radial grid, for remaining times
/// tau in [dt, T] on a geometric grid; linear in log tau and in r.
class GuideField {
public:
    GuideField(const RadialPotential& v, double beta, double T, double dt, const heatflow::StepperConfig& cfg = {});

    double operator()(double tau, double r) const;
    double reach() const { return h_ * static_cast<double>(columns_ - 1); }

private:
    std::vector<double> log_tau_;
    std::vector<double> drift_;  ///< [tau][r]
    std::size_t columns_ = 0;
    double h_ = 0.0;
};

struct SamplingOptions {
    /// Times in (0, T] at which positions are kept; empty means {T}.
    std::vector<double> record_times;
    /// Outside the support, merge steps into one Gaussian increment while the
    /// path stays at least six standard deviations clear of the support.
    bool skip_ahead = true;
    Proposal proposal = Proposal::wiener;
    int threads = 1;
};

struct PathEnsemble {
    std::size_t n_paths = 0;
    double dt = 0.0;
    double T = 0.0;
    std::uint64_t seed = 0;
    double beta = 0.0;
    std::vector<double> times;       ///< recorded times
    std::vector<double> positions;   ///< [path][time][3], row-major
    std::vector<double> log_weights; ///< beta * trapezoid sum of v, plus the Girsanov term when guided
    Proposal proposal = Proposal::wiener;
    double ess = 0.0;
    bool ess_warning = false;

    Point position(std::size_t path, std::size_t time_index) const;
    /// Index of t among the recorded times; throws if absent.
    std::size_t time_index(double t) const;
    /// e^{log w - max log w}.
    std::vector<double> relative_weights() const;
};

/// (sum w)^2 / sum w^2 from log-weights.
double effective_sample_size(const std::vector<double>& log_weights);

PathEnsemble sample_weighted_paths(const RadialPotential& v, double beta, double T, double dt, std::size_t n,
                                   std::uint64_t seed, const Point& start = {0.0, 0.0, 0.0},
                                   const SamplingOptions& options = {});

/// beta * dt * trapezoid sum of v(|x_k|) over a path sampled every dt.
double path_log_weight(const RadialPotential& v, double beta, double dt, const std::vector<Point>& path);

/// omega -> omega(t T) / sqrt(T): times divided by T, positions by sqrt(T).
PathEnsemble rescale_ensemble(const PathEnsemble& e);

/// Weighted right-continuous step CDF.
class WeightedECDF {
public:
    WeightedECDF(std::vector<double> values, std::vector<double> weights);

    double operator()(double x) const;
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    /// Normalized cumulative weight up to and including values()[i].
    const std::vector<double>& cumulative() const { return cumulative_; }
    double mean() const;
    /// Standard error of mean(): sqrt(sum w^2 (x - mean)^2) / sum w.
    double mean_standard_error() const;

private:
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

WeightedECDF empirical_radial_marginal(const PathEnsemble& e, double t);

/// sup over sample points of |ECDF - model| on both sides of each jump.
double ks_distance(const WeightedECDF& a, const std::function<double(double)>& model_cdf);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct KsRow {
    double T;
    double t;
    double ks;
    double ks_reference = -1.0;  ///< control runs only: distance to the Q_gamma marginal
};

struct TheoremOptions {
    double dt = 0.01;
    double threshold = 0.05;
    Proposal proposal = Proposal::guided;
    int threads = 1;
};

struct TheoremReport {
    double chi = 0.0;
    double gamma = 0.0;
    double beta_cr = 0.0;
    std::vector<double> T_list;
    std::vector<double> times;
    std::vector<double> betas;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double threshold = 0.0;
    std::vector<KsRow> table;
    std::vector<double> ess;  ///< one per T
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> notes;
};

/// For beta(T) = beta_cr + chi / sqrt(T): KS distance between the rescaled
/// radial marginal at each t and the Q_{c chi} marginal.
TheoremReport verify_theorem2(const RadialPotential& v, double chi, const std::vector<double>& T_list,
                              const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                              const TheoremOptions& options = {});

/// Fixed beta below beta_cr: KS against the Brownian radial law (ks) and
/// against Q_{reference_gamma} (ks_reference). Passes when ks strictly decreases
/// in T and ks_reference does not.
TheoremReport verify_subcritical_control(const RadialPotential& v, double beta, double reference_gamma,
                                         const std::vector<double>& T_list, const std::vector<double>& times,
                                         std::size_t n, std::uint64_t seed, const TheoremOptions& options = {});

struct Prop2Row {
    double T;
    double estimate;
    double standard_error;
    double model;
    double gap;  ///< |estimate - model| / model
};

struct Prop2Report {
    double chi = 0.0;
    double gamma = 0.0;
    double t = 0.0;
    double y_scaled = 0.0;  ///< |y| / sqrt(T)
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<Prop2Row> table;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> notes;
};

/// Radial test function of the rescaled radius |z| / sqrt(T).
using RadialTest = std::function<double(double)>;

/// E^y[e^{beta(T) int_0^{tT} v} f(omega(tT))] against int pbar_gamma(t, y/sqrt T, x) f(x) dx.
Prop2Report verify_prop2(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                         double y_scaled, const RadialTest& f, std::size_t n, std::uint64_t seed,
                         const TheoremOptions& options = {});

}  // namespace polymer_lab::montecarlo
