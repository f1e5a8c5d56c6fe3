#pragma once

#include <span>
#include <vector>

#include "solitonscope/grid.hpp"
#include "solitonscope/nonlinearity.hpp"
#include "solitonscope/solver.hpp"

namespace solitonscope {

/// Space-time rectangle [r_lo, r_hi] x [t_start, t_end] on which every
/// sampled eta stays at or above delta / 2. Radial boxes never contain the
/// origin. Index ranges are inclusive and refer to the trajectory they were
/// found in.
struct GoodBox {
  Interval interval;
  double t_start = 0.0;
  double t_end = 0.0;
  double delta = 0.0;
  double ref_r = 0.0;
  double ref_t = 0.0;

  std::size_t node_lo = 0, node_hi = 0;
  std::size_t snap_lo = 0, snap_hi = 0;
  std::size_t ref_node = 0;

  std::size_t num_nodes() const { return node_hi - node_lo + 1; }
  std::size_t num_times() const { return snap_hi - snap_lo + 1; }
};

/// Maximal node runs of width >= min_width over which eta >= delta / 2 at
/// every snapshot with t >= t_start. Sorted by r_lo; the reference point is
/// the box node nearest the interval midpoint at t_start.
std::vector<GoodBox> find_good_boxes(const Trajectory& traj, double delta, double min_width, double t_start);

/// delta = 0.5 max eta over the final quarter of the trajectory on I.
double default_delta(const Trajectory& traj, Interval interval);

/// Lifted phase with psi = eta exp(-i theta) on a good box.
struct PhaseSheet {
  GoodBox box;
  int dimension = 1;
  std::vector<double> times;
  std::vector<double> nodes;
  /// theta[s][j], s over box snapshots, j over box nodes.
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> eta;
  /// Principal value -Arg psi at the reference sample.
  double branch_ref = 0.0;
};

/// Unwraps -arg psi from the reference node along the first time row, then
/// forward in time at every node. Throws UnderResolvedPhase when adjacent
/// samples differ by pi - 0.1 or more, and InvalidArgument when the box floor
/// does not hold.
PhaseSheet lift_phase(const Trajectory& traj, const GoodBox& box);

/// Same lift, unwrapped time-first at the reference node and then in space.
PhaseSheet lift_phase_time_first(const Trajectory& traj, const GoodBox& box);

/// max |eta exp(-i theta) - psi| / max |psi| over the box.
double reconstruction_error(const PhaseSheet& sheet, const Trajectory& traj);

struct PlaquetteReport {
  /// Largest |winding| over all elementary space-time plaquettes.
  long max_winding = 0;
  std::size_t nonzero = 0;
  /// max |theta_space_first - theta_time_first| over the box.
  double path_difference = 0.0;
};

PlaquetteReport check_plaquettes(const Trajectory& traj, const PhaseSheet& sheet);

/// Discrete residuals of the polar form of the equation on the box,
///   (a) eta_t = 2 eta' theta' + eta Laplace-theta
///   (b) -Laplace eta + F(eta) eta = theta_t eta - eta |theta'|^2
/// with 6th-order differences in space (three-node margin) and 2nd-order
/// differences in time, as L^2(dr dt) norms divided by the norm of the
/// largest term. (a) is also scaled against |theta_t eta| so that it stays
/// meaningful when every term of (a) vanishes.
struct PolarResiduals {
  double res_a = 0.0;
  double res_b = 0.0;
};

PolarResiduals polar_residuals(const PhaseSheet& sheet, const NonlinearitySpec& nl);

/// Phase slope: E_hat = -d theta(r0, t)/dt by least squares over the second
/// half of the box, r_spread = max over box nodes of |slope(r) - slope(r0)|.
struct PhaseSlope {
  double e_hat = 0.0;
  double r_spread = 0.0;
  /// RMS residual of the linear fit at r0.
  double fit_residual = 0.0;
  /// Box shorter than 10 periods 2 pi / |E_hat|.
  bool short_box = false;
  /// fit_residual above 10% of |slope| times the fitted duration.
  bool non_converged = false;
};

/// Throws InvalidArgument for boxes with fewer than 4 snapshots in the fit
/// window.
PhaseSlope phase_slope(const PhaseSheet& sheet);

/// Time-averaged identity on the box, T = box duration:
///   lhs    = (1/T) int int phi theta_t eta^2
///   rhs    = int phi ubar (-Laplace ubar + F(ubar) ubar)
///   phase_gradient = (1/T) int int phi eta^2 |grad theta|^2
/// with ubar the mean of eta over the final quarter of the box and the
/// measure d^n x. For a standing wave lhs = rhs = -E int phi u^2.
/// testfn is sampled on the box nodes and must vanish on two nodes at each
/// end.
struct ThetaAverage {
  double lhs = 0.0;
  double rhs = 0.0;
  double phase_gradient = 0.0;
};

ThetaAverage theta_average_identity(const PhaseSheet& sheet, const NonlinearitySpec& nl,
                                    std::span<const double> testfn);

/// Smooth bump exp(1 - 1/(1 - s^2)) on the box nodes, s = (r - center) / width.
std::vector<double> box_bump(const PhaseSheet& sheet, double center, double width);

}  // namespace solitonscope
