#include "solitonscope/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "solitonscope/error.hpp"

namespace solitonscope {

RadialGrid RadialGrid::line(double half_length, std::size_t num_points) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw InvalidArgument("line grid: half length must be finite and positive");
  if (num_points < kMinPoints)
    throw InvalidArgument("line grid: need at least " + std::to_string(kMinPoints) + " points");
  if (num_points % 2 != 0)
    throw InvalidArgument("line grid: point count must be even so x = 0 is a node");
  const double h = 2.0 * half_length / static_cast<double>(num_points);
  return RadialGrid(1, -half_length, half_length, num_points, h);
}

RadialGrid RadialGrid::radial(double r_max, std::size_t num_points) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw InvalidArgument("radial grid: r_max must be finite and positive");
  if (num_points < kMinPoints)
    throw InvalidArgument("radial grid: need at least " + std::to_string(kMinPoints) + " points");
  const double h = r_max / static_cast<double>(num_points - 1);
  return RadialGrid(3, 0.0, r_max, num_points, h);
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> x(num_points_);
  for (std::size_t k = 0; k < num_points_; ++k) x[k] = node(k);
  return x;
}

double RadialGrid::weight(std::size_t k) const {
  if (dimension_ == 1) return spacing_;
  const double r = node(k);
  const double w = 4.0 * std::numbers::pi * r * r * spacing_;
  return (k == 0 || k + 1 == num_points_) ? 0.5 * w : w;
}

double RadialGrid::radius(std::size_t k) const { return std::abs(node(k)); }

double RadialGrid::sphere_measure(double r) const {
  return dimension_ == 1 ? 1.0 : 4.0 * std::numbers::pi * r * r;
}

double RadialGrid::max_radius() const {
  // Line: the last node sits at L - h, the periodic image of -L is excluded.
  return dimension_ == 1 ? r_max_ - spacing_ : r_max_;
}

std::size_t RadialGrid::nearest(double x) const {
  const double idx = std::round((x - r_min_) / spacing_);
  if (idx <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(idx), num_points_ - 1);
}

double RadialGrid::integrate(std::span<const double> f) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += weight(k) * f[k];
  return sum;
}

}  // namespace solitonscope
