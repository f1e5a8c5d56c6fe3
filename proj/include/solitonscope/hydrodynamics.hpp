#pragma once

#include <string>
#include <vector>

#include "solitonscope/solver.hpp"
#include "solitonscope/wave_field.hpp"

namespace solitonscope {

/// Madelung variables of one field: rho = |psi|^2, eta = |psi|,
/// current J = Im(conj(psi) grad psi) and velocity v = J / rho, set to zero
/// on the masked (near-zero density) nodes.
struct HydroFrame {
  RadialGrid grid;
  double time = 0.0;
  std::vector<double> eta;
  std::vector<double> rho;
  std::vector<double> current;
  std::vector<double> velocity;
  std::vector<bool> zero_set_mask;
};

/// Mask threshold 1e-12 max(rho).
HydroFrame hydro_frame(const WaveField& field);
/// Mask nodes with rho < eps_zero; eps_zero must be positive.
HydroFrame hydro_frame(const WaveField& field, double eps_zero);

struct IwcResult {
  double worst = 0.0;
  bool satisfied = true;
};

/// worst = max over nodes of eta^2 (r_hat . v). Satisfied when worst does
/// not exceed 1e-12 max |current| (or the given tolerance).
IwcResult iwc_indicator(const HydroFrame& frame);
IwcResult iwc_indicator(const HydroFrame& frame, double tol);

/// |grad psi|^2 = |grad eta|^2 + eta^2 v^2 with grad eta = Re(conj(psi) grad psi) / eta
/// and eta v = Im(conj(psi) grad psi) / eta, summed over every node with
/// rho > 0. The relative mask of hydro_frame is not applied here: in 3D the
/// masked tail still carries ~1e-8 of the gradient energy.
struct KineticSplitting {
  double grad_psi_sq = 0.0;
  double grad_eta_sq = 0.0;
  double eta_v_sq = 0.0;
  double relative_error() const;
};

KineticSplitting kinetic_splitting(const WaveField& field);
/// min rho >= 1e-8 max rho.
bool is_nodeless(const WaveField& field);

/// Mass inside the ball |x| <= radius. Radial grids integrate 4 pi h |w|^2
/// up to the cell interfaces and interpolate linearly between them, the same
/// partition the solver's flux ledger uses. Line grids integrate the linear
/// interpolant of rho over [-R, R].
double mass_in_ball(const WaveField& field, double radius);

/// Outward sphere flux c_n R^(n-1) eta^2 v.N at the sampled radii.
///
/// Radial trajectories use the solver's interface flux for both the
/// instantaneous flux and its time integral, so
/// 2 cumulative + (ball_mass(T) - ball_mass(0)) vanishes to rounding.
/// Line trajectories interpolate J linearly and integrate by the trapezoid
/// rule in time.
struct FluxSeries {
  std::vector<double> radii;
  std::vector<double> times;
  std::vector<std::vector<double>> flux;
  std::vector<std::vector<double>> cumulative;
  std::vector<std::vector<double>> ball_mass;
  double initial_mass = 0.0;
  std::vector<std::string> warnings;

  /// max over (t, R) of |2 cumulative + ball_mass(t) - ball_mass(0)|.
  double balance_defect() const;
  /// 0 <= -cumulative <= initial_mass / 2 at every R and every one of the
  /// first `count` snapshots, both sides with slack 1e-9.
  bool within_incoming_bound(std::size_t count = static_cast<std::size_t>(-1)) const;
};

FluxSeries flux_series(const Trajectory& traj, const std::vector<double>& radii);

struct FluxLimitReport {
  double inner_sup = 0.0;
  double outer_sup = 0.0;
  double tolerance = 0.0;
  bool passed() const { return inner_sup <= tolerance && outer_sup <= tolerance; }
};

/// Sup over time of |flux| at the smallest and largest sampled radius, with
/// tolerance rel_tol times the largest flux anywhere in the series.
FluxLimitReport flux_limit_checks(const FluxSeries& series, double rel_tol = 1e-6);

struct VelocityDecay {
  std::vector<double> times;
  std::vector<double> norm;
  std::vector<double> running_average;
  /// min eta over the interval dropped below delta at some snapshot.
  bool floor_violated = false;
  double min_eta = 0.0;
};

/// || chi_I v ||_{L^2} per snapshot with the grid measure.
VelocityDecay velocity_decay_on_interval(const Trajectory& traj, Interval interval, double delta);

}  // namespace solitonscope
