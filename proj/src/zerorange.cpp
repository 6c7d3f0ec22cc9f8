#include "polymer_lab/zerorange.hpp"

#include <algorithm>
#include <exception>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace polymer_lab::zerorange {

namespace {

void require_positive_norm(double r, const char* who) {
    if (!(r > 0.0)) {
        throw std::domain_error(std::string(who) + ": point at the origin");
    }
}

/// (e^{-(r-rho)^2/2t} - e^{-(r+rho)^2/2t}) / sqrt(2 pi t), written to avoid
/// cancellation when r rho << t.
double free_pair(double t, double rho, double r) {
    const double a = std::exp(-(r - rho) * (r - rho) / (2.0 * t));
    return a * -std::expm1(-2.0 * r * rho / t) / std::sqrt(2.0 * std::numbers::pi * t);
}

}  // namespace

ZeroRangeParams ZeroRangeParams::make(double gamma, Evaluator evaluator) {
    if (!std::isfinite(gamma)) {
        throw std::invalid_argument("ZeroRangeParams: gamma must be finite");
    }
    ZeroRangeParams p;
    p.gamma = gamma;
    p.contour = laplace::default_contour(gamma);
    p.evaluator = evaluator;
    return p;
}

double norm(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

double kernel(const ZeroRangeParams& p, double rho, double t) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("kernel: t must be positive");
    }
    if (!(rho >= 0.0)) {
        throw std::invalid_argument("kernel: rho must be non-negative");
    }
    if (p.evaluator == Evaluator::closed_form || rho == 0.0) {
        return laplace::kernel_closed_form(p.gamma, rho, t);
    }
    return laplace::kernel_integral(p.gamma, rho, t, laplace::saddle_adapted(p.contour, rho, t));
}

double survival(const ZeroRangeParams& p, double rho, double t) {
    if (!(t >= 0.0)) {
        throw std::invalid_argument("survival: t must be non-negative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    if (p.evaluator == Evaluator::closed_form) {
        return laplace::survival_closed_form(p.gamma, rho, t);
    }
    return laplace::survival_integral(p.gamma, rho, t, laplace::saddle_adapted(p.contour, rho, t));
}

double zeta(const ZeroRangeParams& p) { return survival(p, 0.0, 1.0); }

double heat_kernel(double t, const Point& x, const Point& y) {
    double d2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        d2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    return std::exp(-d2 / (2.0 * t)) / std::pow(2.0 * std::numbers::pi * t, 1.5);
}

double pbar(const ZeroRangeParams& p, double t, const Point& x, const Point& y) {
    const double rx = norm(x);
    const double ry = norm(y);
    require_positive_norm(rx, "pbar");
    require_positive_norm(ry, "pbar");
    return heat_kernel(t, x, y) + kernel(p, rx + ry, t) / (2.0 * std::numbers::pi * rx * ry);
}

double zbar_radius(const ZeroRangeParams& p, double t, double r) {
    require_positive_norm(r, "zbar");
    if (t == 0.0) {
        return 1.0;
    }
    return 1.0 + survival(p, r, t) / r;
}

double zbar(const ZeroRangeParams& p, double t, const Point& x) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("zbar: t must be positive");
    }
    return zbar_radius(p, t, norm(x));
}

double pbar_radial(const ZeroRangeParams& p, double t, double rho, double r) {
    require_positive_norm(rho, "pbar_radial");
    if (r <= 0.0) {
        return 0.0;
    }
    return r / rho * (free_pair(t, rho, r) + 2.0 * kernel(p, rho + r, t));
}

double fdd_density(const ZeroRangeParams& p, double T, const Point& x0, const std::vector<double>& times,
                   const std::vector<Point>& points) {
    if (times.empty() || times.size() != points.size()) {
        throw std::invalid_argument("fdd_density: times and points must be non-empty and of equal length");
    }
    double previous = 0.0;
    for (double t : times) {
        if (!(t > previous)) {
            throw std::invalid_argument("fdd_density: times must be strictly increasing and positive");
        }
        previous = t;
    }
    if (times.back() > T) {
        throw std::invalid_argument("fdd_density: last time exceeds the horizon T");
    }
    double value = 1.0 / zbar(p, T, x0);
    Point from = x0;
    double t_from = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        value *= pbar(p, times[i] - t_from, from, points[i]);
        from = points[i];
        t_from = times[i];
    }
    return value * zbar_radius(p, T - times.back(), norm(points.back()));
}

double transition_R(const ZeroRangeParams& p, double s, double t, const Point& y, const Point& x) {
    if (!(s >= 0.0) || !(s < t) || !(t <= 1.0)) {
        throw std::invalid_argument("transition_R: requires 0 <= s < t <= 1");
    }
    return pbar(p, t - s, y, x) * zbar_radius(p, 1.0 - t, norm(x)) / zbar_radius(p, 1.0 - s, norm(y));
}

double transition_R0(const ZeroRangeParams& p, double t, const Point& x) {
    if (!(t > 0.0) || !(t <= 1.0)) {
        throw std::invalid_argument("transition_R0: t must lie in (0, 1]");
    }
    const double r = norm(x);
    require_positive_norm(r, "transition_R0");
    return kernel(p, r, t) * zbar_radius(p, 1.0 - t, r) / (2.0 * std::numbers::pi * r * zeta(p));
}

double marginal_density(const ZeroRangeParams& p, double t, double r) {
    if (!(t > 0.0) || !(t <= 1.0)) {
        throw std::invalid_argument("marginal_density: t must lie in (0, 1]");
    }
    if (r < 0.0) {
        return 0.0;
    }
    return 2.0 * kernel(p, r, t) * (r + survival(p, r, 1.0 - t)) / zeta(p);
}

RadialDensity marginal_radial(const ZeroRangeParams& p, double t, const std::vector<double>& grid) {
    if (!(t > 0.0) || !(t <= 1.0)) {
        throw std::invalid_argument("marginal_radial: t must lie in (0, 1]");
    }
    const double z = zeta(p);
    std::vector<double> density(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        density[i] = 2.0 * kernel(p, r, t) * (r + survival(p, r, 1.0 - t)) / z;
    }
    return RadialDensity(grid, std::move(density));
}

RadialDensity marginal_radial(const ZeroRangeParams& p, double t) {
    return marginal_radial(p, t, geometric_linear_grid());
}

// --- sampler ---------------------------------------------------------------

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PathSampler::PathSampler(const ZeroRangeParams& p, int n_steps, SamplerConfig cfg)
    : n_steps_(n_steps), cfg_(std::move(cfg)) {
    if (n_steps < 2) {
        throw std::invalid_argument("PathSampler: n_steps must be at least 2");
    }
    const auto& x = cfg_.grid;
    if (x.size() < 3 || x.front() != 0.0) {
        throw std::invalid_argument("PathSampler: radial grid must start at 0 with at least 3 nodes");
    }
    // tables are large; the erfcx forms stand in for the contour quadrature
    ZeroRangeParams cf = p;
    cf.evaluator = Evaluator::closed_form;

    std::vector<double> mid(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        mid[i] = 0.5 * (x[i] + x[i + 1]);
    }
    const std::vector<double> sources =
        geometric_linear_grid(x.back(), cfg_.source_rows, cfg_.source_rows / 8, 1e-4, 0.1);
    const double dt = 1.0 / n_steps;

    tables_.resize(n_steps);
    for (int k = 0; k < n_steps; ++k) {
        const double remaining_after = 1.0 - (k + 1) * dt;
        const double remaining_before = 1.0 - k * dt;
        // r Zbar_{remaining_after}(r), at nodes and midpoints
        std::vector<double> w_node(x.size());
        std::vector<double> w_mid(mid.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            w_node[i] = x[i] + survival(cf, x[i], remaining_after);
        }
        for (std::size_t i = 0; i < mid.size(); ++i) {
            w_mid[i] = mid[i] + survival(cf, mid[i], remaining_after);
        }
        Table& table = tables_[k];
        table.sources = k == 0 ? std::vector<double>{0.0} : sources;
        for (double rho : table.sources) {
            // rho Zbar_{remaining_before}(rho); J(0, .) at the origin
            const double norm_const = rho + survival(cf, rho, remaining_before);
            auto density = [&](double r, double w) {
                const double free = rho > 0.0 ? free_pair(dt, rho, r) : 0.0;
                return (free + 2.0 * kernel(cf, rho + r, dt)) * w / norm_const;
            };
            std::vector<double> cum(x.size(), 0.0);
            double prev = density(x[0], w_node[0]);
            for (std::size_t i = 1; i < x.size(); ++i) {
                const double next = density(x[i], w_node[i]);
                const double m = density(mid[i - 1], w_mid[i - 1]);
                cum[i] = cum[i - 1] + (x[i] - x[i - 1]) * (prev + 4.0 * m + next) / 6.0;
                prev = next;
            }
            const double mass = cum.back();
            std::vector<float> row(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                row[i] = static_cast<float>(cum[i] / mass);
            }
            row.back() = 1.0f;
            table.cdf.push_back(std::move(row));
            table.mass.push_back(mass);
        }
        if (k == 0 && table.mass.front() < 1.0 - cfg_.exhaustion_tol) {
            std::ostringstream msg;
            msg << "first-step CDF reaches only " << table.mass.front() << " on [0, " << x.back()
                << "]; enlarge the radial grid";
            throw GridExhaustionError(msg.str());
        }
    }
}

double PathSampler::draw(const Table& table, double rho, double u_mix, double u) const {
    std::size_t row = 0;
    if (table.sources.size() > 1) {
        const auto& s = table.sources;
        if (rho >= s.back()) {
            row = s.size() - 1;
        } else {
            const auto it = std::upper_bound(s.begin(), s.end(), rho);
            const auto j = static_cast<std::size_t>(it - s.begin()) - 1;
            const double w = (rho - s[j]) / (s[j + 1] - s[j]);
            row = u_mix < w ? j + 1 : j;
        }
    }
    if (table.mass[row] < 1.0 - cfg_.exhaustion_tol) {
        std::ostringstream msg;
        msg << "CDF from r = " << table.sources[row] << " reaches only " << table.mass[row] << " on [0, "
            << cfg_.grid.back() << "]; enlarge the radial grid";
        throw GridExhaustionError(msg.str());
    }
    const auto& cdf = table.cdf[row];
    const auto& x = cfg_.grid;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), static_cast<float>(u));
    if (it == cdf.end()) {
        return x.back();
    }
    const auto i = static_cast<std::size_t>(it - cdf.begin());
    if (i == 0) {
        return x.front();
    }
    const double lo = cdf[i - 1];
    const double hi = cdf[i];
    const double w = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return x[i - 1] + std::clamp(w, 0.0, 1.0) * (x[i] - x[i - 1]);
}

std::vector<double> PathSampler::sample(std::uint64_t seed, std::uint64_t index) const {
    std::mt19937_64 rng(path_seed(seed, index));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> path(n_steps_ + 1, 0.0);
    for (int k = 0; k < n_steps_; ++k) {
        const double u_mix = uniform(rng);
        const double u = uniform(rng);
        path[k + 1] = draw(tables_[k], path[k], u_mix, u);
    }
    return path;
}

std::vector<std::vector<double>> PathSampler::sample_many(std::uint64_t seed, std::size_t n, int threads) const {
    std::vector<std::vector<double>> paths(n);
    threads = std::max(1, threads);
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](int worker, std::size_t begin, std::size_t end) {
        try {
            for (std::size_t i = begin; i < end; ++i) {
                paths[i] = sample(seed, i);
            }
        } catch (...) {
            errors[worker] = std::current_exception();
        }
    };
    if (threads == 1 || n < 2) {
        work(0, 0, n);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back(work, w, begin, end);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return paths;
}

std::vector<double> sample_path(const ZeroRangeParams& p, int n_steps, std::uint64_t seed) {
    return PathSampler(p, n_steps).sample(seed);
}

}  // namespace polymer_lab::zerorange
