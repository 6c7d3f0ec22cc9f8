#include "polymer_lab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polymer_lab/special.hpp"

namespace polymer_lab {

namespace {

void check_grid(std::span<const double> grid, std::size_t values, const char* who) {
    if (grid.size() != values) {
        throw std::invalid_argument(std::string(who) + ": grid and values differ in length");
    }
    if (grid.size() < 2) {
        throw std::invalid_argument(std::string(who) + ": at least two nodes are required");
    }
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument(std::string(who) + ": grid must be strictly increasing");
        }
    }
}

double interpolate(std::span<const double> x, std::span<const double> y, double r) {
    if (r < x.front() || r > x.back()) {
        return 0.0;
    }
    auto it = std::upper_bound(x.begin(), x.end(), r);
    if (it == x.end()) {
        return y.back();
    }
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double w = (r - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
}

}  // namespace

RadialFunction::RadialFunction(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    check_grid(grid_, values_.size(), "RadialFunction");
}

double RadialFunction::operator()(double r) const { return interpolate(grid_, values_, r); }

RadialDensity::RadialDensity(std::vector<double> grid, std::vector<double> density)
    : grid_(std::move(grid)), density_(std::move(density)) {
    check_grid(grid_, density_.size(), "RadialDensity");
    if (grid_.front() < 0.0) {
        throw std::invalid_argument("RadialDensity: radii must be non-negative");
    }
    cumulative_.assign(grid_.size(), 0.0);
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + 0.5 * (grid_[i] - grid_[i - 1]) * (density_[i] + density_[i - 1]);
    }
}

double RadialDensity::total_mass() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

double RadialDensity::cdf(double r) const {
    if (grid_.empty() || r <= grid_.front()) {
        return 0.0;
    }
    if (r >= grid_.back()) {
        return 1.0;
    }
    return interpolate(grid_, cumulative_, r) / total_mass();
}

double RadialDensity::mean() const {
    std::vector<double> moment(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        moment[i] = grid_[i] * density_[i];
    }
    return trapezoid(grid_, moment) / total_mass();
}

std::vector<double> geometric_linear_grid(double r_max, int nodes, int geometric, double r_min,
                                          double r_switch) {
    if (nodes < geometric + 3 || !(r_min > 0.0) || !(r_switch > r_min) || !(r_max > r_switch)) {
        throw std::invalid_argument("geometric_linear_grid: inconsistent parameters");
    }
    std::vector<double> grid;
    grid.reserve(nodes);
    grid.push_back(0.0);
    const double ratio = std::pow(r_switch / r_min, 1.0 / geometric);
    double r = r_min;
    for (int k = 0; k < geometric; ++k, r *= ratio) {
        grid.push_back(r);
    }
    const int linear = nodes - static_cast<int>(grid.size());
    for (int k = 0; k < linear; ++k) {
        grid.push_back(r_switch + (r_max - r_switch) * k / (linear - 1));
    }
    return grid;
}

double brownian_radial_cdf(double r, double t) {
    if (r <= 0.0) {
        return 0.0;
    }
    const double z = r / std::sqrt(t);
    return std::erf(z / std::numbers::sqrt2) - std::sqrt(2.0 / std::numbers::pi) * z * std::exp(-0.5 * z * z);
}

double brownian_radial_density(double r, double t) {
    if (r < 0.0) {
        return 0.0;
    }
    return std::sqrt(2.0 / std::numbers::pi) * r * r / (t * std::sqrt(t)) * std::exp(-0.5 * r * r / t);
}

}  // namespace polymer_lab
