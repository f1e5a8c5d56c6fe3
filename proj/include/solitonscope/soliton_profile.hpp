#pragma once

#include <functional>
#include <span>
#include <vector>

#include "solitonscope/grid.hpp"
#include "solitonscope/nonlinearity.hpp"

namespace solitonscope {

/// Ground state u > 0 of -Laplace u + F(u) u = -E u sampled on a grid.
///
/// On a line grid u is even and sampled at every node x_k; on a radial grid
/// it is sampled at r_k. `du` holds the radial derivative (d/dx on the line).
struct SolitonProfile {
  RadialGrid grid;
  std::vector<double> u;
  std::vector<double> du;
  double energy_param = 0.0;
  /// Max-norm residual of the profile ODE, measured on the shooting mesh.
  double ode_residual = 0.0;
  int node_count = 0;

  /// Dense half-line table r_j = j * dense_step used by evaluate(); finer
  /// than the grid so that quadrature against test functions is not limited
  /// by interpolation error.
  double dense_step = 0.0;
  std::vector<double> dense_u;
  std::vector<double> dense_du;

  double u0() const;
  /// u(|x|) by cubic Hermite interpolation on the dense table, continued past
  /// its end by the linearized decay exp(-sqrt(E) r) / r^(n-1).
  double evaluate(double x) const;
  double evaluate_derivative(double x) const;
};

/// 1D ground state. Cubic focusing uses the closed form
/// sqrt(2E) sech(sqrt(E) x); other powers go through shooting.
SolitonProfile solve_profile_1d(double energy, const NonlinearitySpec& nl, const RadialGrid& grid);

/// Radial 3D ground state by shooting from u(0) = a, u'(0) = 0 and bisecting
/// a between trajectories that cross zero and trajectories that turn upward.
SolitonProfile solve_profile_3d(double energy, const NonlinearitySpec& nl, const RadialGrid& grid);

/// Dispatches on grid dimension.
SolitonProfile solve_profile(double energy, const NonlinearitySpec& nl, const RadialGrid& grid);

/// Shooting on the line even for cubic focusing; exposed so tests can compare
/// the shooting path against the closed form.
SolitonProfile shoot_profile(double energy, const NonlinearitySpec& nl, const RadialGrid& grid);

namespace shooting {

/// Right-hand side of the profile ODE as a first-order system in (u, u').
struct ProfileOde {
  double energy;
  NonlinearitySpec nl;
  int dimension;

  /// u'' = E u + F(|u|) u - (n - 1) u' / r.
  double second_derivative(double r, double u, double du) const;
  /// Series start u(r) ~ a + alpha r^2 + beta r^4 near the origin.
  void series_start(double a, double r, double& u, double& du) const;
};

enum class Outcome { overshoot, undershoot, undecided };

/// Integrates from the origin with RK4 at step h until u crosses zero
/// (overshoot), u' turns positive (undershoot) or r_end is reached.
Outcome classify_rk4(const ProfileOde& ode, double a, double h, double r_end);

/// Bisection on u(0) with the given classifier. Returns the bracket
/// midpoint once the bracket cannot be refined further. Throws BracketError
/// when no sign change is found in [1e-6, 1e3].
double bisect_initial_value(const std::function<Outcome(double)>& classify);

}  // namespace shooting

/// Norms for comparing |psi| against a profile on an interval.
enum class DistanceNorm { l2, hs, sup };

/// Windowed distance || chi_I (eta - u) || on interval I, where chi_I has
/// cosine shoulders over 10% of |I| at each end. Uses the 1D measure dr on I;
/// hs is the periodic H^s norm of the zero-padded windowed difference.
double profile_distance(std::span<const double> eta, const SolitonProfile& profile,
                        Interval interval, DistanceNorm norm, double s = 0.5);

/// Same distance against an arbitrary even profile u(|x|).
double windowed_distance(std::span<const double> eta, const RadialGrid& grid,
                         const std::function<double(double)>& profile, Interval interval,
                         DistanceNorm norm, double s = 0.5);

/// Smooth cutoff with cosine shoulders, 1 on the inner 80% of I.
double window(Interval interval, double x);

struct ProfileFit {
  double energy = 0.0;
  double distance = 0.0;
};

/// One-parameter L^2(I) fit of the profile family u_E to eta by golden-section
/// search over E. Throws BracketError when the distance is monotone over the
/// scanned range.
ProfileFit fit_profile(std::span<const double> eta, const RadialGrid& grid,
                       const NonlinearitySpec& nl, Interval interval);

/// One weak-form test of the profile equation against a smooth bump phi:
/// |(-Laplace phi, u) + (phi, F(u) u) + E (phi, u)| <= 1e-6 ||phi||_H1 ||u||_H1.
struct WeakFormCheck {
  double center = 0.0;
  double width = 0.0;
  double residual = 0.0;
  double bound = 0.0;
  bool passed() const { return residual <= bound; }
};

/// Tests the profile against 8 compactly supported bumps exp(1 - 1/(1 - s^2))
/// placed away from the origin inside the core of the profile.
std::vector<WeakFormCheck> weak_form_check(const SolitonProfile& profile, const NonlinearitySpec& nl);

/// u_E(r) = E^(1/p) u_1(sqrt(E) r) from a reference profile at E = 1.
class ProfileFamily {
 public:
  ProfileFamily(const NonlinearitySpec& nl, int dimension);
  double operator()(double energy, double r) const;

 private:
  NonlinearitySpec nl_;
  int dimension_;
  bool closed_form_;
  std::vector<SolitonProfile> reference_;
};

}  // namespace solitonscope
