#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace solitonscope {

/// Closed interval [lo, hi] in the radial (3D) or line (1D) coordinate.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double r) const { return r >= lo && r <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Uniform spatial grid, either the periodic line [-L, L) or the radial
/// half-line [0, R_max].
///
/// Line grids hold N nodes x_k = -L + k h with h = 2L / N (the node at +L is
/// the periodic image of -L); N must be even so the grid is
/// symmetric about x = 0. Radial grids hold N nodes r_k = k h with
/// h = R_max / (N - 1); the solver imposes psi'(0) = 0 and psi(R_max) = 0.
///
/// Quadrature weights: h on the line, trapezoid 4 pi r_k^2 h on the radial
/// grid. The grid is a small value type; nodes and weights are computed on
/// demand.
class RadialGrid {
 public:
  static constexpr std::size_t kMinPoints = 16;

  static RadialGrid line(double half_length, std::size_t num_points);
  static RadialGrid radial(double r_max, std::size_t num_points);

  int dimension() const { return dimension_; }
  bool is_line() const { return dimension_ == 1; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return num_points_; }

  double node(std::size_t k) const { return r_min_ + static_cast<double>(k) * spacing_; }
  std::vector<double> nodes() const;

  /// Quadrature weight of node k for integrals over R^n (d^n x).
  double weight(std::size_t k) const;

  /// Radial distance |x| of node k.
  double radius(std::size_t k) const;

  /// Surface measure c_n r^{n-1} of the sphere of radius r: 4 pi r^2 in 3D.
  /// On the line the "sphere" is the point pair {-r, r}, each with measure 1.
  double sphere_measure(double r) const;

  /// Largest radius that lies strictly inside the grid.
  double max_radius() const;

  /// Index of the node nearest to coordinate x (clamped to the grid).
  std::size_t nearest(double x) const;

  /// Integral of f over R^n with this grid's quadrature.
  double integrate(std::span<const double> f) const;

  bool operator==(const RadialGrid&) const = default;

 private:
  RadialGrid(int dimension, double r_min, double r_max, std::size_t n, double h)
      : dimension_(dimension), r_min_(r_min), r_max_(r_max), num_points_(n), spacing_(h) {}

  int dimension_ = 1;
  double r_min_ = 0.0;
  double r_max_ = 0.0;
  std::size_t num_points_ = 0;
  double spacing_ = 0.0;
};

}  // namespace solitonscope
