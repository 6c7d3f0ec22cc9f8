#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace polymer_lab {

/// A function of the radius tabulated on an increasing grid, linearly
/// interpolated between nodes and zero outside [grid.front(), grid.back()].
class RadialFunction {
public:
    RadialFunction() = default;
    RadialFunction(std::vector<double> grid, std::vector<double> values);

    double operator()(double r) const;

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return grid_.size(); }
    bool empty() const { return grid_.empty(); }

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

/// Probability density of a radial coordinate, in probability per unit radius.
class RadialDensity {
public:
    RadialDensity() = default;
    RadialDensity(std::vector<double> grid, std::vector<double> density);

    std::span<const double> grid() const { return grid_; }
    std::span<const double> density() const { return density_; }

    /// Trapezoid integral over the whole grid.
    double total_mass() const;
    /// Cumulative distribution at r, normalized by total_mass().
    double cdf(double r) const;
    /// Cumulative trapezoid integral at each node (unnormalized).
    std::span<const double> cumulative() const { return cumulative_; }
    double mean() const;

private:
    std::vector<double> grid_;
    std::vector<double> density_;
    std::vector<double> cumulative_;
};

/// Node 0 at the origin, `geometric` nodes spaced geometrically on
/// [r_min, r_switch], then linear spacing up to r_max; `nodes` in total.
std::vector<double> geometric_linear_grid(double r_max = 8.0, int nodes = 2048, int geometric = 128,
                                          double r_min = 1e-5, double r_switch = 0.1);

/// CDF of |W_t| for a standard 3-d Brownian motion W started at the origin.
double brownian_radial_cdf(double r, double t);

/// Density of |W_t| for a standard 3-d Brownian motion started at the origin.
double brownian_radial_density(double r, double t);

}  // namespace polymer_lab
