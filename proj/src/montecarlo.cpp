#include "polymer_lab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "polymer_lab/radial.hpp"
#include "polymer_lab/special.hpp"

namespace polymer_lab::montecarlo {

namespace {

/// Number of standard deviations a merged increment must keep clear of the support.
constexpr double kSkipSigmas = 6.0;

std::vector<long long> record_steps(const std::vector<double>& times, double T, double dt) {
    std::vector<long long> steps;
    double prev = 0.0;
    for (double t : times) {
        if (!(t > prev) || t > T * (1.0 + 1e-12)) {
            throw std::invalid_argument("sample_weighted_paths: record times must increase within (0, T]");
        }
        const long long k = std::llround(t / dt);
        if (std::fabs(k * dt - t) > 1e-9 * std::max(1.0, T)) {
            std::ostringstream msg;
            msg << "sample_weighted_paths: record time " << t << " is not a multiple of dt = " << dt;
            throw std::invalid_argument(msg.str());
        }
        steps.push_back(k);
        prev = t;
    }
    return steps;
}

template <class Work>
void parallel_for(std::size_t n, int threads, Work&& work) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        work(std::size_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                work(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

Point PathEnsemble::position(std::size_t path, std::size_t k) const {
    const std::size_t base = (path * times.size() + k) * 3;
    return {positions[base], positions[base + 1], positions[base + 2]};
}

std::size_t PathEnsemble::time_index(double t) const {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (std::fabs(times[k] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) {
            return k;
        }
    }
    std::ostringstream msg;
    msg << "time " << t << " is not on the ensemble's record grid";
    throw std::invalid_argument(msg.str());
}

std::vector<double> PathEnsemble::relative_weights() const {
    std::vector<double> w(log_weights.size());
    if (w.empty()) return w;
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(log_weights[i] - top);
    }
    return w;
}

double effective_sample_size(const std::vector<double>& log_weights) {
    if (log_weights.empty()) return 0.0;
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    double s1 = 0.0;
    double s2 = 0.0;
    for (double lw : log_weights) {
        const double w = std::exp(lw - top);
        s1 += w;
        s2 += w * w;
    }
    return s1 * s1 / s2;
}

std::string to_string(Proposal p) {
    return p == Proposal::guided ? "guided" : "wiener";
}

GuideField::GuideField(const RadialPotential& v, double beta, double T, double dt, const heatflow::StepperConfig& cfg) {
    if (!(T > 0.0) || !(dt > 0.0) || !(dt <= T)) {
        throw std::invalid_argument("GuideField: need 0 < dt <= T");
    }
    const int rows = std::max(2, static_cast<int>(std::ceil(16.0 * std::log10(T / dt))) + 1);
    std::vector<double> taus(rows);
    for (int i = 0; i < rows; ++i) {
        log_tau_.push_back(std::log(dt) + (std::log(T) - std::log(dt)) * i / (rows - 1));
        taus[i] = std::exp(log_tau_.back());
    }
    taus.back() = T;
    heatflow::StepperConfig c = cfg;
    c.boundary = heatflow::Boundary::dirichlet_one;
    const auto profiles = heatflow::partition_profiles(v, beta, taus, c);
    h_ = std::min(0.01, v.support_radius() / 32.0);
    columns_ = static_cast<std::size_t>(profiles.front().grid().back() / h_) + 1;
    drift_.assign(static_cast<std::size_t>(rows) * columns_, 0.0);
    std::vector<double> log_z(columns_);
    for (int i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns_; ++j) {
            const double z = profiles[i](h_ * static_cast<double>(j));
            if (!(z > 0.0)) {
                throw std::runtime_error("GuideField: partition function is not positive");
            }
            log_z[j] = std::log(z);
        }
        double* row = &drift_[static_cast<std::size_t>(i) * columns_];
        for (std::size_t j = 1; j + 1 < columns_; ++j) {
            row[j] = (log_z[j + 1] - log_z[j - 1]) / (2.0 * h_);
        }
    }
}

double GuideField::operator()(double tau, double r) const {
    const double x = r / h_;
    if (!(x < static_cast<double>(columns_ - 1))) {
        return 0.0;
    }
    const double span = log_tau_.back() - log_tau_.front();
    double y = (std::log(tau) - log_tau_.front()) / span * static_cast<double>(log_tau_.size() - 1);
    y = std::clamp(y, 0.0, static_cast<double>(log_tau_.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(y), log_tau_.size() - 2);
    const std::size_t j = static_cast<std::size_t>(x);
    const double fy = y - static_cast<double>(i);
    const double fx = x - static_cast<double>(j);
    const double* lo = &drift_[i * columns_ + j];
    const double* hi = lo + columns_;
    return (1.0 - fy) * ((1.0 - fx) * lo[0] + fx * lo[1]) + fy * ((1.0 - fx) * hi[0] + fx * hi[1]);
}

PathEnsemble sample_weighted_paths(const RadialPotential& v, double beta, double T, double dt, std::size_t n,
                                   std::uint64_t seed, const Point& start, const SamplingOptions& options) {
    if (!(T > 0.0) || !(dt > 0.0) || !(dt <= T) || n == 0 || !std::isfinite(beta)) {
        throw std::invalid_argument("sample_weighted_paths: need T > 0, 0 < dt <= T, n > 0 and finite beta");
    }
    const long long total_steps = std::llround(T / dt);
    if (std::fabs(total_steps * dt - T) > 1e-9 * T) {
        throw std::invalid_argument("sample_weighted_paths: T must be a multiple of dt");
    }
    PathEnsemble e;
    e.n_paths = n;
    e.dt = dt;
    e.T = T;
    e.seed = seed;
    e.beta = beta;
    e.proposal = options.proposal;
    e.times = options.record_times.empty() ? std::vector<double>{T} : options.record_times;
    const std::vector<long long> rec = record_steps(e.times, T, dt);
    e.positions.assign(n * e.times.size() * 3, 0.0);
    e.log_weights.assign(n, 0.0);

    std::optional<GuideField> guide;
    if (options.proposal == Proposal::guided) {
        guide.emplace(v, beta, T, dt);
    }
    const double R = v.support_radius();
    auto simulate = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::mt19937_64 rng(zerorange::path_seed(seed, i));
            std::normal_distribution<double> normal(0.0, 1.0);
            Point x = start;
            double v_prev = v(zerorange::norm(x));
            double sum = 0.0;
            double girsanov = 0.0;
            long long k = 0;
            std::size_t next = 0;
            while (next < rec.size()) {
                const double r = zerorange::norm(x);
                const double b = guide && r > 0.0 ? (*guide)(T - static_cast<double>(k) * dt, r) : 0.0;
                long long m = 1;
                if (options.skip_ahead && r > R) {
                    const double clear = (r - R) / kSkipSigmas;
                    m = std::max<long long>(1, static_cast<long long>(clear * clear / dt));
                    m = std::min(m, rec[next] - k);
                    while (m >= 2 && std::fabs(b) * static_cast<double>(m) * dt > 0.5 * (r - R)) {
                        m /= 2;
                    }
                }
                const double span = static_cast<double>(m) * dt;
                const double scale = std::sqrt(span);
                double drift_dot_noise = 0.0;
                for (int c = 0; c < 3; ++c) {
                    const double xi = normal(rng);
                    const double direction = r > 0.0 ? x[c] / r : 0.0;
                    drift_dot_noise += direction * xi;
                    x[c] += b * direction * span + scale * xi;
                }
                // free Gaussian over the drifted one, evaluated at the same increment
                girsanov -= b * scale * drift_dot_noise + 0.5 * b * b * span;
                const double v_next = v(zerorange::norm(x));
                if (m == 1) {
                    sum += 0.5 * (v_prev + v_next);
                }
                // a merged step stays six sigma clear of the support, where v vanishes
                v_prev = v_next;
                k += m;
                if (k == rec[next]) {
                    const std::size_t base = (i * rec.size() + next) * 3;
                    for (int c = 0; c < 3; ++c) e.positions[base + c] = x[c];
                    ++next;
                }
            }
            e.log_weights[i] = beta * dt * sum + girsanov;
        }
    };
    parallel_for(n, options.threads, simulate);
    e.ess = effective_sample_size(e.log_weights);
    e.ess_warning = e.ess < 0.01 * static_cast<double>(n);
    return e;
}

double path_log_weight(const RadialPotential& v, double beta, double dt, const std::vector<Point>& path) {
    double sum = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        sum += 0.5 * (v(zerorange::norm(path[k - 1])) + v(zerorange::norm(path[k])));
    }
    return beta * dt * sum;
}

PathEnsemble rescale_ensemble(const PathEnsemble& e) {
    PathEnsemble out = e;
    const double root = std::sqrt(e.T);
    for (double& t : out.times) t /= e.T;
    for (double& x : out.positions) x /= root;
    out.dt = e.dt / e.T;
    out.T = 1.0;
    return out;
}

// --- weighted ECDF ---------------------------------------------------------

WeightedECDF::WeightedECDF(std::vector<double> values, std::vector<double> weights) {
    if (values.size() != weights.size() || values.empty()) {
        throw std::invalid_argument("WeightedECDF: values and weights must be non-empty and of equal length");
    }
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("WeightedECDF: weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("WeightedECDF: total weight must be positive");
    }
    values_.resize(order.size());
    weights_.resize(order.size());
    cumulative_.resize(order.size());
    double run = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        values_[k] = values[order[k]];
        weights_[k] = weights[order[k]] / total;
        run += weights_[k];
        cumulative_[k] = run;
    }
    cumulative_.back() = 1.0;
}

double WeightedECDF::operator()(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    if (it == values_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double WeightedECDF::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) m += weights_[k] * values_[k];
    return m;
}

double WeightedECDF::mean_standard_error() const {
    const double m = mean();
    double s = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        s += weights_[k] * weights_[k] * (values_[k] - m) * (values_[k] - m);
    }
    return std::sqrt(s);
}

WeightedECDF empirical_radial_marginal(const PathEnsemble& e, double t) {
    const std::size_t k = e.time_index(t);
    std::vector<double> radii(e.n_paths);
    for (std::size_t i = 0; i < e.n_paths; ++i) {
        radii[i] = zerorange::norm(e.position(i, k));
    }
    return WeightedECDF(std::move(radii), e.relative_weights());
}

double ks_distance(const WeightedECDF& a, const std::function<double(double)>& model_cdf) {
    double worst = 0.0;
    const auto& x = a.values();
    const auto& c = a.cumulative();
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double f = model_cdf(x[k]);
        const double below = k > 0 ? c[k - 1] : 0.0;
        worst = std::max({worst, std::fabs(c[k] - f), std::fabs(below - f)});
    }
    return std::min(worst, 1.0);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass:
            return "pass";
        case Verdict::fail:
            return "fail";
        case Verdict::inconclusive:
            return "inconclusive";
    }
    return "unknown";
}

// --- verification ----------------------------------------------------------

namespace {

void check_lists(const std::vector<double>& T_list, const std::vector<double>& times) {
    if (T_list.size() < 2 || times.empty()) {
        throw std::invalid_argument("verify: need at least two horizons and one time");
    }
    for (std::size_t i = 1; i < T_list.size(); ++i) {
        if (!(T_list[i] > T_list[i - 1])) throw std::invalid_argument("verify: horizons must increase");
    }
    for (double t : times) {
        if (!(t > 0.0) || t > 1.0) throw std::invalid_argument("verify: times must lie in (0, 1]");
    }
}

SamplingOptions record_at(const std::vector<double>& times, double T, const TheoremOptions& options) {
    SamplingOptions opt;
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (double t : sorted) opt.record_times.push_back(t * T);
    opt.threads = options.threads;
    opt.proposal = options.proposal;
    return opt;
}

bool decreasing_in_T(const std::vector<KsRow>& rows, double t, bool reference) {
    double prev = 2.0;
    for (const auto& row : rows) {
        if (row.t != t) continue;
        const double value = reference ? row.ks_reference : row.ks;
        if (!(value < prev)) return false;
        prev = value;
    }
    return true;
}

double at_last_T(const std::vector<KsRow>& rows, double T, double t, bool reference) {
    for (const auto& row : rows) {
        if (row.T == T && row.t == t) return reference ? row.ks_reference : row.ks;
    }
    return 1.0;
}

}  // namespace

TheoremReport verify_theorem2(const RadialPotential& v, double chi, const std::vector<double>& T_list,
                              const std::vector<double>& times, std::size_t n, std::uint64_t seed,
                              const TheoremOptions& options) {
    check_lists(T_list, times);
    const spectral::SpectralSummary s = spectral::summarize(v);
    TheoremReport report;
    report.chi = chi;
    report.gamma = spectral::gamma_of_chi(s, chi);
    report.beta_cr = s.beta_cr;
    report.T_list = T_list;
    report.times = times;
    report.n = n;
    report.seed = seed;
    report.dt = options.dt;
    report.threshold = options.threshold;

    const auto zr = zerorange::ZeroRangeParams::make(report.gamma);
    std::vector<RadialDensity> models;
    for (double t : times) models.push_back(zerorange::marginal_radial(zr, t));

    bool ess_collapse = false;
    for (double T : T_list) {
        const double beta = s.beta_cr + chi / std::sqrt(T);
        report.betas.push_back(beta);
        const PathEnsemble e = rescale_ensemble(
            sample_weighted_paths(v, beta, T, options.dt, n, seed, {0.0, 0.0, 0.0}, record_at(times, T, options)));
        report.ess.push_back(e.ess);
        if (e.ess_warning) {
            ess_collapse = true;
            std::ostringstream msg;
            msg << "T=" << T << ": ESS " << e.ess << " is below 1% of " << n << " paths";
            report.notes.push_back(msg.str());
        }
        for (std::size_t j = 0; j < times.size(); ++j) {
            const WeightedECDF ecdf = empirical_radial_marginal(e, times[j]);
            const RadialDensity& model = models[j];
            report.table.push_back({T, times[j], ks_distance(ecdf, [&](double r) { return model.cdf(r); })});
        }
    }
    bool ok = true;
    for (double t : times) {
        if (!decreasing_in_T(report.table, t, false)) {
            ok = false;
            report.notes.push_back("KS not strictly decreasing in T at t=" + std::to_string(t));
        }
        if (!(at_last_T(report.table, T_list.back(), t, false) < options.threshold)) {
            ok = false;
            report.notes.push_back("KS at the largest T exceeds the threshold at t=" + std::to_string(t));
        }
    }
    report.notes.push_back("threshold " + std::to_string(options.threshold) +
                           " is an engineering choice; no convergence rate is available");
    report.verdict = ess_collapse ? Verdict::inconclusive : (ok ? Verdict::pass : Verdict::fail);
    return report;
}

TheoremReport verify_subcritical_control(const RadialPotential& v, double beta, double reference_gamma,
                                         const std::vector<double>& T_list, const std::vector<double>& times,
                                         std::size_t n, std::uint64_t seed, const TheoremOptions& options) {
    check_lists(T_list, times);
    const spectral::SpectralSummary s = spectral::summarize(v);
    if (!(beta < s.beta_cr)) {
        throw std::invalid_argument("verify_subcritical_control: beta must be below beta_cr");
    }
    TheoremReport report;
    report.gamma = reference_gamma;
    report.beta_cr = s.beta_cr;
    report.T_list = T_list;
    report.times = times;
    report.n = n;
    report.seed = seed;
    report.dt = options.dt;
    report.threshold = options.threshold;

    const auto zr = zerorange::ZeroRangeParams::make(reference_gamma);
    std::vector<RadialDensity> models;
    for (double t : times) models.push_back(zerorange::marginal_radial(zr, t));

    bool ess_collapse = false;
    for (double T : T_list) {
        report.betas.push_back(beta);
        const PathEnsemble e = rescale_ensemble(
            sample_weighted_paths(v, beta, T, options.dt, n, seed, {0.0, 0.0, 0.0}, record_at(times, T, options)));
        report.ess.push_back(e.ess);
        ess_collapse = ess_collapse || e.ess_warning;
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double t = times[j];
            const WeightedECDF ecdf = empirical_radial_marginal(e, t);
            const RadialDensity& model = models[j];
            KsRow row{T, t, ks_distance(ecdf, [t](double r) { return brownian_radial_cdf(r, t); })};
            row.ks_reference = ks_distance(ecdf, [&](double r) { return model.cdf(r); });
            report.table.push_back(row);
        }
    }
    bool ok = true;
    for (double t : times) {
        if (!decreasing_in_T(report.table, t, false)) {
            ok = false;
            report.notes.push_back("KS to the Brownian law not strictly decreasing at t=" + std::to_string(t));
        }
        if (decreasing_in_T(report.table, t, true)) {
            ok = false;
            report.notes.push_back("KS to Q_gamma decreases in T at t=" + std::to_string(t));
        }
    }
    report.verdict = ess_collapse ? Verdict::inconclusive : (ok ? Verdict::pass : Verdict::fail);
    return report;
}

Prop2Report verify_prop2(const RadialPotential& v, double chi, const std::vector<double>& T_list, double t,
                         double y_scaled, const RadialTest& f, std::size_t n, std::uint64_t seed,
                         const TheoremOptions& options) {
    check_lists(T_list, {t});
    if (!(y_scaled > 0.0)) {
        throw std::invalid_argument("verify_prop2: |y| / sqrt(T) must be positive");
    }
    const spectral::SpectralSummary s = spectral::summarize(v);
    Prop2Report report;
    report.chi = chi;
    report.gamma = spectral::gamma_of_chi(s, chi);
    report.t = t;
    report.y_scaled = y_scaled;
    report.n = n;
    report.seed = seed;

    const auto zr = zerorange::ZeroRangeParams::make(report.gamma);
    const double reach = y_scaled + 12.0 * std::sqrt(t);
    const double model = integrate_gl(
        [&](double r) { return r > 0.0 ? zerorange::pbar_radial(zr, t, y_scaled, r) * f(r) : 0.0; }, 0.0, reach, 48);

    bool noisy = false;
    for (double T : T_list) {
        const double beta = s.beta_cr + chi / std::sqrt(T);
        const double root = std::sqrt(T);
        SamplingOptions opt;
        opt.record_times = {t * T};
        opt.threads = options.threads;
        opt.proposal = options.proposal;
        const PathEnsemble e =
            sample_weighted_paths(v, beta, t * T, options.dt, n, seed, {y_scaled * root, 0.0, 0.0}, opt);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double value = std::exp(e.log_weights[i]) * f(zerorange::norm(e.position(i, 0)) / root);
            sum += value;
            sum_sq += value * value;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(n));
        const double gap = std::fabs(mean - model) / std::fabs(model);
        report.table.push_back({T, mean, se, model, gap});
        if (se / std::fabs(model) > gap) {
            noisy = true;
            std::ostringstream msg;
            msg << "T=" << T << ": standard error " << se << " exceeds the gap " << std::fabs(mean - model);
            report.notes.push_back(msg.str());
        }
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < report.table.size(); ++i) {
        decreasing = decreasing && report.table[i].gap < report.table[i - 1].gap;
    }
    report.verdict = noisy ? Verdict::inconclusive : (decreasing ? Verdict::pass : Verdict::fail);
    return report;
}

}  // namespace polymer_lab::montecarlo
