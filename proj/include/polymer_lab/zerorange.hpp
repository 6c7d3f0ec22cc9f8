#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "polymer_lab/laplace.hpp"
#include "polymer_lab/radial.hpp"

/// The zero-range polymer measures Q_gamma: kernels, partition functions,
/// finite-dimensional densities and a radial path sampler.
///
/// Every quantity reduces to two scalar inversions, K(rho, t) (kernel_integral)
/// and J(rho, t) (survival_integral, the time integral of K).
namespace polymer_lab::zerorange {

using Point = std::array<double, 3>;

enum class Evaluator {
    quadrature,   ///< contour quadrature, the reference
    closed_form,  ///< erfcx closed forms, pinned against quadrature in the tests
};

struct ZeroRangeParams {
    double gamma = 0.0;
    laplace::ContourSpec contour;
    Evaluator evaluator = Evaluator::quadrature;

    /// gamma with the default contour (apex max(0, gamma^2/2) + 1).
    static ZeroRangeParams make(double gamma, Evaluator evaluator = Evaluator::quadrature);
};

class GridExhaustionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double norm(const Point& x);

/// K(gamma, rho, t); rho = 0 is evaluated in closed form.
double kernel(const ZeroRangeParams& p, double rho, double t);
/// J(gamma, rho, t) = int_0^t K(gamma, rho, s) ds; zero at t = 0.
double survival(const ZeroRangeParams& p, double rho, double t);
/// lim_{|y| -> 0} |y| (Zbar_{gamma,1}(y) - 1) = J(gamma, 0, 1).
double zeta(const ZeroRangeParams& p);

/// 3-d Gaussian heat kernel e^{-|x-y|^2/2t} / (2 pi t)^{3/2}.
double heat_kernel(double t, const Point& x, const Point& y);

double pbar(const ZeroRangeParams& p, double t, const Point& x, const Point& y);
double zbar(const ZeroRangeParams& p, double t, const Point& x);
/// Zbar as a function of |x|; 1 at t = 0.
double zbar_radius(const ZeroRangeParams& p, double t, double r);

/// Integral of pbar(t, x, .) over the sphere |y| = r, for |x| = rho:
/// (r/rho) [(e^{-(r-rho)^2/2t} - e^{-(r+rho)^2/2t}) / sqrt(2 pi t) + 2 K(rho + r, t)].
double pbar_radial(const ZeroRangeParams& p, double t, double rho, double r);

/// Finite-dimensional density of Pbar^{x0}_{gamma,T} at times 0 < t_1 < ... < t_n <= T.
double fdd_density(const ZeroRangeParams& p, double T, const Point& x0, const std::vector<double>& times,
                   const std::vector<Point>& points);

/// pbar(t-s, y, x) Zbar_{1-t}(x) / Zbar_{1-s}(y), 0 <= s < t <= 1.
double transition_R(const ZeroRangeParams& p, double s, double t, const Point& y, const Point& x);
/// Origin start: K(|x|, t) Zbar_{1-t}(x) / (2 pi |x| zeta).
double transition_R0(const ZeroRangeParams& p, double t, const Point& x);

/// Radial density of |omega(t)| under Q_gamma: 2 K(r, t) (r + J(r, 1-t)) / zeta.
double marginal_density(const ZeroRangeParams& p, double t, double r);
RadialDensity marginal_radial(const ZeroRangeParams& p, double t);
RadialDensity marginal_radial(const ZeroRangeParams& p, double t, const std::vector<double>& grid);

struct SamplerConfig {
    std::vector<double> grid = geometric_linear_grid();  ///< radial nodes for inverse-CDF
    int source_rows = 256;                               ///< tabulated start radii per step
    double exhaustion_tol = 1e-6;
};

/// Radial chain r(0) = 0, r(1/n), ..., r(1) under Q_gamma. Step k is drawn
/// by inverse CDF from a table of conditional CDFs on a grid of start radii;
/// between tabulated start radii the two neighbouring rows are mixed.
class PathSampler {
public:
    PathSampler(const ZeroRangeParams& p, int n_steps, SamplerConfig cfg = {});

    int n_steps() const { return n_steps_; }
    /// Path `index` of the stream labelled `seed`; n_steps + 1 radii.
    std::vector<double> sample(std::uint64_t seed, std::uint64_t index = 0) const;
    std::vector<std::vector<double>> sample_many(std::uint64_t seed, std::size_t n, int threads = 1) const;

private:
    struct Table {
        std::vector<double> sources;        // start radii (one entry for the first step)
        std::vector<std::vector<float>> cdf;  // normalized cumulative per source
        std::vector<double> mass;           // row integral before normalization
    };
    double draw(const Table& table, double rho, double u_mix, double u) const;

    int n_steps_;
    SamplerConfig cfg_;
    std::vector<Table> tables_;
};

std::vector<double> sample_path(const ZeroRangeParams& p, int n_steps, std::uint64_t seed);

/// Per-path seed derived from a stream seed and a path index.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace polymer_lab::zerorange
