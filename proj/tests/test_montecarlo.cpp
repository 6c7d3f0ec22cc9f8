#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "polymer_lab/heatflow.hpp"
#include "polymer_lab/montecarlo.hpp"

using namespace polymer_lab;
using namespace polymer_lab::montecarlo;

namespace {

const RadialPotential ball = RadialPotential::ball(1.0, 0.0);

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

SamplingOptions guided(std::vector<double> times = {}) {
    SamplingOptions o;
    o.record_times = std::move(times);
    o.proposal = Proposal::guided;
    return o;
}

}  // namespace

TEST_CASE("zero coupling gives unit weights and Brownian increments") {
    const std::size_t n = 20000;
    const double T = 4.0;
    const auto e = sample_weighted_paths(ball, 0.0, T, 0.01, n, 3);
    CHECK(std::all_of(e.log_weights.begin(), e.log_weights.end(), [](double w) { return w == 0.0; }));
    CHECK(e.ess == doctest::Approx(static_cast<double>(n)));
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) m2 += e.position(i, 0)[0] * e.position(i, 0)[0];
    const double var = m2 / static_cast<double>(n);
    CHECK(std::fabs(var - T) < 3.0 * T * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("rescaled Brownian marginals") {
    const std::size_t n = 100000;
    SamplingOptions o;
    o.record_times = {2.0, 4.0};
    const auto raw = sample_weighted_paths(ball, 0.0, 4.0, 0.01, n, 11, {0.0, 0.0, 0.0}, o);
    const auto e = rescale_ensemble(raw);
    CHECK(e.T == 1.0);
    CHECK(e.times == std::vector<double>{0.5, 1.0});
    std::vector<double> x1;
    for (std::size_t i = 0; i < n; ++i) x1.push_back(e.position(i, 1)[0]);
    const WeightedECDF first(x1, std::vector<double>(n, 1.0));
    CHECK(ks_distance(first, normal_cdf) < 0.01);
    for (double t : {0.5, 1.0}) {
        const auto radial = empirical_radial_marginal(e, t);
        CHECK(ks_distance(radial, [t](double r) { return brownian_radial_cdf(r, t); }) < 0.01);
    }
    // endpoint of the raw path divided by sqrt(T)
    for (std::size_t i : {0u, 17u, 999u}) {
        CHECK(e.position(i, 1)[2] == raw.position(i, 1)[2] / 2.0);
    }
    // a horizon-1 ensemble is a fixed point
    const auto again = rescale_ensemble(e);
    CHECK(again.positions == e.positions);
    CHECK(again.times == e.times);
    // rescaling commutes with the radial marginal
    const auto a = empirical_radial_marginal(e, 0.5);
    const auto b = empirical_radial_marginal(raw, 2.0);
    for (std::size_t k = 0; k < a.size(); k += 997) {
        CHECK(a.values()[k] == doctest::Approx(b.values()[k] / 2.0).epsilon(1e-15));
    }
}

TEST_CASE("seed determinism") {
    const auto a = sample_weighted_paths(ball, 1.0, 9.0, 0.01, 2000, 42, {0.5, 0.0, 0.0}, guided());
    SamplingOptions threaded = guided();
    threaded.threads = 3;
    const auto b = sample_weighted_paths(ball, 1.0, 9.0, 0.01, 2000, 42, {0.5, 0.0, 0.0}, threaded);
    const auto c = sample_weighted_paths(ball, 1.0, 9.0, 0.01, 2000, 43, {0.5, 0.0, 0.0}, guided());
    CHECK(a.positions == b.positions);
    CHECK(a.log_weights == b.log_weights);
    CHECK(a.positions != c.positions);
}

TEST_CASE("effective sample size falls with the coupling") {
    double previous = 1e300;
    for (double beta : {0.0, 0.5, 1.0}) {
        const auto e = sample_weighted_paths(ball, beta, 25.0, 0.01, 5000, 8);
        CHECK(e.ess < previous + 1e-9);
        previous = e.ess;
    }
    CHECK(effective_sample_size({0.0, 0.0, 0.0, 0.0}) == doctest::Approx(4.0));
    CHECK(effective_sample_size({0.0, -800.0, -800.0}) == doctest::Approx(1.0));
    const auto collapsed = sample_weighted_paths(ball, 4.0, 25.0, 0.01, 1000, 8);
    CHECK(collapsed.ess_warning);
}

TEST_CASE("both proposals estimate the partition function") {
    const double beta = 1.0;
    const double T = 4.0;
    const double z = heatflow::partition_function(ball, beta, T, 0.0);
    for (auto proposal : {Proposal::wiener, Proposal::guided}) {
        std::vector<double> means;
        for (double dt : {0.01, 0.005}) {
            SamplingOptions o;
            o.proposal = proposal;
            const std::size_t n = 20000;
            const auto e = sample_weighted_paths(ball, beta, T, dt, n, 5, {0.0, 0.0, 0.0}, o);
            double s1 = 0.0;
            double s2 = 0.0;
            for (double lw : e.log_weights) {
                s1 += std::exp(lw);
                s2 += std::exp(2.0 * lw);
            }
            const double mean = s1 / static_cast<double>(n);
            const double se = std::sqrt((s2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n));
            CHECK(std::fabs(mean - z) < 3.0 * se + 0.01 * z);
            if (proposal == Proposal::guided) {
                CHECK(std::fabs(mean / z - 1.0) < 0.01);
                CHECK(e.ess > 0.9 * static_cast<double>(n));
            }
            means.push_back(mean);
        }
        // halving dt on a pinned seed moves the mean weight by under 1%
        CHECK(std::fabs(means[1] / means[0] - 1.0) < 0.01);
    }
}

TEST_CASE("path weights use the trapezoid rule") {
    const double level = ball(0.0);
    const std::vector<Point> inside{{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}, {0.2, 0.0, 0.0}};
    CHECK(path_log_weight(ball, 2.0, 0.01, inside) == doctest::Approx(2.0 * 0.01 * 2.0 * level));
    const std::vector<Point> crossing{{0.0, 0.0, 0.5}, {0.0, 0.0, 1.5}};
    CHECK(path_log_weight(ball, 1.0, 0.01, crossing) == doctest::Approx(0.01 * 0.5 * level));
}

TEST_CASE("argument checks") {
    SamplingOptions o;
    o.record_times = {0.333};
    CHECK_THROWS_AS(sample_weighted_paths(ball, 1.0, 1.0, 0.01, 100, 1, {0.0, 0.0, 0.0}, o), std::invalid_argument);
    CHECK_THROWS_AS(sample_weighted_paths(ball, 1.0, 1.0, 0.0, 100, 1), std::invalid_argument);
    const auto e = sample_weighted_paths(ball, 0.0, 1.0, 0.01, 100, 1);
    CHECK_THROWS_AS(e.time_index(0.5), std::invalid_argument);
}

TEST_CASE("weighted empirical CDF") {
    const WeightedECDF plain({3.0, 1.0, 2.0, 2.0}, {1.0, 1.0, 1.0, 1.0});
    CHECK(plain(0.5) == 0.0);
    CHECK(plain(1.0) == 0.25);
    CHECK(plain(2.0) == 0.75);
    CHECK(plain(10.0) == 1.0);
    CHECK(plain.mean() == doctest::Approx(2.0));

    const WeightedECDF weighted({1.0, 2.0}, {3.0, 1.0});
    CHECK(weighted(1.5) == doctest::Approx(0.75));
    double previous = 0.0;
    for (double x = -1.0; x < 4.0; x += 0.1) {
        CHECK(weighted(x) >= previous);
        CHECK(weighted(x) <= 1.0);
        previous = weighted(x);
    }
    CHECK_THROWS_AS(WeightedECDF({1.0}, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WeightedECDF({}, {}), std::invalid_argument);
}

TEST_CASE("Kolmogorov distance") {
    std::mt19937_64 rng(2);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> x(100000);
    for (double& v : x) v = expo(rng);
    const WeightedECDF e(x, std::vector<double>(x.size(), 1.0));
    const double d = ks_distance(e, [](double r) { return r > 0.0 ? 1.0 - std::exp(-r) : 0.0; });
    CHECK(d >= 0.0);
    CHECK(d < 0.01);
    const WeightedECDF far({10.0, 11.0, 12.0}, {1.0, 1.0, 1.0});
    CHECK(ks_distance(far, [](double r) { return r > 1.0 ? 1.0 : 0.0; }) == doctest::Approx(1.0));
}

TEST_CASE("theorem report plumbing") {
    const auto report = verify_theorem2(ball, 1.0, {4.0, 9.0}, {0.5, 1.0}, 2000, 9);
    REQUIRE(report.table.size() == 4);
    CHECK(report.ess.size() == 2);
    CHECK(report.betas[0] == doctest::Approx(report.beta_cr + 0.5));
    CHECK(report.betas[1] == doctest::Approx(report.beta_cr + 1.0 / 3.0));
    CHECK(report.gamma == doctest::Approx(std::numbers::pi * std::numbers::pi / 8.0).epsilon(1e-8));
    for (const auto& row : report.table) CHECK((row.ks >= 0.0 && row.ks <= 1.0));

    TheoremOptions plain;
    plain.proposal = Proposal::wiener;
    const auto collapsed = verify_theorem2(ball, 3.0, {25.0, 36.0}, {1.0}, 1000, 9, plain);
    CHECK(collapsed.verdict == Verdict::inconclusive);
}

TEST_CASE("unit test function reproduces the partition function") {
    const double T = 25.0;
    const double t = 0.5;
    const double y = 0.5;
    const auto report = verify_prop2(ball, 0.0, {T, 49.0}, t, y, [](double) { return 1.0; }, 20000, 4);
    const auto& row = report.table.front();
    const double z = heatflow::partition_function(ball, spectral::critical_beta(ball), t * T, y * std::sqrt(T));
    CHECK(std::fabs(row.estimate - z) < 3.0 * row.standard_error + 1e-3 * z);
    // the model is the zero-range partition function
    const auto q = zerorange::ZeroRangeParams::make(0.0);
    CHECK(row.model == doctest::Approx(zerorange::zbar_radius(q, t, y)).epsilon(1e-6));
}
