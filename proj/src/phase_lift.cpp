#include "solitonscope/phase_lift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "solitonscope/error.hpp"

namespace solitonscope {

namespace {

constexpr double kJumpLimit = std::numbers::pi - 0.1;

// Increment of theta = -arg psi from sample a to sample b.
double increment(cplx a, cplx b) { return -std::arg(b * std::conj(a)); }

double checked_increment(cplx a, cplx b, std::size_t snap, std::size_t node) {
  const double d = increment(a, b);
  if (std::abs(d) >= kJumpLimit) {
    std::ostringstream msg;
    msg << "phase lift: jump " << d << " at snapshot " << snap << ", node " << node
        << " is under-resolved; reduce dt, output_stride or spacing";
    throw UnderResolvedPhase(msg.str(), snap, node);
  }
  return d;
}

// First and second derivative at index j of uniformly spaced samples with the
// widest centered stencil that fits (orders 6, 4, 2), one-sided at the ends.
double first_derivative(const std::vector<double>& f, std::size_t j, double h) {
  const std::size_t n = f.size();
  const std::size_t margin = std::min(j, n - 1 - j);
  if (margin >= 3)
    return (-f[j - 3] + 9.0 * f[j - 2] - 45.0 * f[j - 1] + 45.0 * f[j + 1] - 9.0 * f[j + 2] + f[j + 3]) / (60.0 * h);
  if (margin == 2) return (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h);
  if (margin == 1) return (f[j + 1] - f[j - 1]) / (2.0 * h);
  if (j == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
}

double second_derivative(const std::vector<double>& f, std::size_t j, double h) {
  const std::size_t n = f.size();
  const std::size_t margin = std::min(j, n - 1 - j);
  const double h2 = h * h;
  if (margin >= 3)
    return (2.0 * f[j - 3] - 27.0 * f[j - 2] + 270.0 * f[j - 1] - 490.0 * f[j] + 270.0 * f[j + 1] -
            27.0 * f[j + 2] + 2.0 * f[j + 3]) /
           (180.0 * h2);
  if (margin == 2)
    return (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]) / (12.0 * h2);
  if (margin == 1) return (f[j - 1] - 2.0 * f[j] + f[j + 1]) / h2;
  if (j == 0) return (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  return (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
}

// d/dt at box time index s, central inside and one-sided at the ends.
double time_derivative(const std::vector<std::vector<double>>& f, std::size_t s, std::size_t j, double dt) {
  const std::size_t n = f.size();
  if (s == 0) return (-3.0 * f[0][j] + 4.0 * f[1][j] - f[2][j]) / (2.0 * dt);
  if (s + 1 == n) return (3.0 * f[n - 1][j] - 4.0 * f[n - 2][j] + f[n - 3][j]) / (2.0 * dt);
  return (f[s + 1][j] - f[s - 1][j]) / (2.0 * dt);
}

double uniform_step(const std::vector<double>& times) {
  if (times.size() < 3) throw InvalidArgument("phase diagnostics need at least 3 snapshots in the box");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t s = 1; s < times.size(); ++s)
    if (std::abs(times[s] - times[s - 1] - dt) > 1e-9 * dt)
      throw InvalidArgument("phase diagnostics need uniformly spaced snapshots");
  return dt;
}

// Laplacian of a radial (or line) profile sampled on box nodes.
double laplacian(const std::vector<double>& f, std::size_t j, double h, double r, int dimension) {
  double v = second_derivative(f, j, h);
  if (dimension == 3) v += 2.0 / r * first_derivative(f, j, h);
  return v;
}

void validate_box(const Trajectory& traj, const GoodBox& box) {
  if (traj.size() == 0) throw InvalidArgument("phase lift: empty trajectory");
  const auto& g = traj.grid();
  if (box.node_hi >= g.size() || box.node_lo >= box.node_hi || box.snap_hi >= traj.size() ||
      box.snap_lo > box.snap_hi || box.ref_node < box.node_lo || box.ref_node > box.node_hi)
    throw InvalidArgument("phase lift: box does not fit the trajectory");
  if (!g.is_line() && box.node_lo == 0) throw InvalidArgument("phase lift: radial boxes must exclude the origin");
  for (std::size_t s = box.snap_lo; s <= box.snap_hi; ++s)
    for (std::size_t k = box.node_lo; k <= box.node_hi; ++k)
      if (std::abs(traj.snapshots[s].values[k]) < 0.5 * box.delta) {
        std::ostringstream msg;
        msg << "phase lift: eta below delta/2 at snapshot " << s << ", node " << k;
        throw InvalidArgument(msg.str());
      }
}

PhaseSheet empty_sheet(const Trajectory& traj, const GoodBox& box) {
  PhaseSheet sheet;
  sheet.box = box;
  const auto& g = traj.grid();
  sheet.dimension = g.dimension();
  for (std::size_t k = box.node_lo; k <= box.node_hi; ++k) sheet.nodes.push_back(g.node(k));
  sheet.theta.assign(box.num_times(), std::vector<double>(box.num_nodes(), 0.0));
  sheet.eta.assign(box.num_times(), std::vector<double>(box.num_nodes(), 0.0));
  for (std::size_t s = 0; s < box.num_times(); ++s) {
    const auto& f = traj.snapshots[box.snap_lo + s];
    sheet.times.push_back(f.time);
    for (std::size_t j = 0; j < box.num_nodes(); ++j) sheet.eta[s][j] = std::abs(f.values[box.node_lo + j]);
  }
  const cplx ref = traj.snapshots[box.snap_lo].values[box.ref_node];
  sheet.branch_ref = -std::arg(ref);
  return sheet;
}

cplx sample(const Trajectory& traj, const GoodBox& box, std::size_t s, std::size_t j) {
  return traj.snapshots[box.snap_lo + s].values[box.node_lo + j];
}

// Unwraps row s in space starting from the reference column.
void unwrap_row(const Trajectory& traj, const GoodBox& box, PhaseSheet& sheet, std::size_t s) {
  const std::size_t ref = box.ref_node - box.node_lo;
  auto& row = sheet.theta[s];
  for (std::size_t j = ref; j + 1 < row.size(); ++j)
    row[j + 1] = row[j] + checked_increment(sample(traj, box, s, j), sample(traj, box, s, j + 1),
                                            box.snap_lo + s, box.node_lo + j + 1);
  for (std::size_t j = ref; j > 0; --j)
    row[j - 1] = row[j] + checked_increment(sample(traj, box, s, j), sample(traj, box, s, j - 1),
                                            box.snap_lo + s, box.node_lo + j - 1);
}

}  // namespace

std::vector<GoodBox> find_good_boxes(const Trajectory& traj, double delta, double min_width, double t_start) {
  if (!(delta > 0.0)) throw InvalidArgument("good boxes: delta must be positive");
  if (!(min_width >= 0.0)) throw InvalidArgument("good boxes: min_width must be >= 0");
  std::vector<GoodBox> boxes;
  if (traj.size() == 0) return boxes;
  const auto& g = traj.grid();
  std::size_t s0 = 0;
  const double slack = 1e-9 * std::max(1.0, std::abs(t_start));
  while (s0 < traj.size() && traj.time(s0) < t_start - slack) ++s0;
  if (s0 == traj.size()) return boxes;

  std::vector<bool> ok(g.size(), true);
  if (!g.is_line()) ok.front() = ok.back() = false;
  for (std::size_t s = s0; s < traj.size(); ++s)
    for (std::size_t k = 0; k < g.size(); ++k)
      if (ok[k] && std::abs(traj.snapshots[s].values[k]) < 0.5 * delta) ok[k] = false;

  std::size_t k = 0;
  while (k < g.size()) {
    if (!ok[k]) {
      ++k;
      continue;
    }
    std::size_t hi = k;
    while (hi + 1 < g.size() && ok[hi + 1]) ++hi;
    if (hi > k && g.node(hi) - g.node(k) >= min_width) {
      GoodBox b;
      b.node_lo = k;
      b.node_hi = hi;
      b.snap_lo = s0;
      b.snap_hi = traj.size() - 1;
      b.interval = {g.node(k), g.node(hi)};
      b.t_start = traj.time(s0);
      b.t_end = traj.time(b.snap_hi);
      b.delta = delta;
      const double mid = 0.5 * (b.interval.lo + b.interval.hi);
      b.ref_node = std::clamp(g.nearest(mid), k, hi);
      b.ref_r = g.node(b.ref_node);
      b.ref_t = b.t_start;
      boxes.push_back(b);
    }
    k = hi + 1;
  }
  return boxes;
}

double default_delta(const Trajectory& traj, Interval interval) {
  if (traj.size() == 0) throw InvalidArgument("default delta: empty trajectory");
  const auto& g = traj.grid();
  const double t0 = traj.time(0), t1 = traj.time(traj.size() - 1);
  double m = 0.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    if (traj.time(s) < t0 + 0.75 * (t1 - t0)) continue;
    for (std::size_t k = 0; k < g.size(); ++k)
      if (interval.contains(g.node(k))) m = std::max(m, std::abs(traj.snapshots[s].values[k]));
  }
  return 0.5 * m;
}

PhaseSheet lift_phase(const Trajectory& traj, const GoodBox& box) {
  validate_box(traj, box);
  auto sheet = empty_sheet(traj, box);
  const std::size_t ref = box.ref_node - box.node_lo;
  sheet.theta[0][ref] = sheet.branch_ref;
  unwrap_row(traj, box, sheet, 0);
  for (std::size_t s = 1; s < box.num_times(); ++s)
    for (std::size_t j = 0; j < box.num_nodes(); ++j)
      sheet.theta[s][j] = sheet.theta[s - 1][j] + checked_increment(sample(traj, box, s - 1, j),
                                                                    sample(traj, box, s, j), box.snap_lo + s,
                                                                    box.node_lo + j);
  return sheet;
}

PhaseSheet lift_phase_time_first(const Trajectory& traj, const GoodBox& box) {
  validate_box(traj, box);
  auto sheet = empty_sheet(traj, box);
  const std::size_t ref = box.ref_node - box.node_lo;
  sheet.theta[0][ref] = sheet.branch_ref;
  for (std::size_t s = 1; s < box.num_times(); ++s)
    sheet.theta[s][ref] = sheet.theta[s - 1][ref] + checked_increment(sample(traj, box, s - 1, ref),
                                                                      sample(traj, box, s, ref), box.snap_lo + s,
                                                                      box.ref_node);
  for (std::size_t s = 0; s < box.num_times(); ++s) unwrap_row(traj, box, sheet, s);
  return sheet;
}

double reconstruction_error(const PhaseSheet& sheet, const Trajectory& traj) {
  const auto& box = sheet.box;
  double worst = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < box.num_times(); ++s)
    for (std::size_t j = 0; j < box.num_nodes(); ++j) {
      const cplx psi = sample(traj, box, s, j);
      const cplx rebuilt = sheet.eta[s][j] * std::exp(cplx(0.0, -sheet.theta[s][j]));
      worst = std::max(worst, std::abs(rebuilt - psi));
      scale = std::max(scale, std::abs(psi));
    }
  return scale > 0.0 ? worst / scale : 0.0;
}

PlaquetteReport check_plaquettes(const Trajectory& traj, const PhaseSheet& sheet) {
  const auto& box = sheet.box;
  PlaquetteReport r;
  for (std::size_t s = 0; s + 1 < box.num_times(); ++s)
    for (std::size_t j = 0; j + 1 < box.num_nodes(); ++j) {
      const cplx a = sample(traj, box, s, j), b = sample(traj, box, s, j + 1);
      const cplx c = sample(traj, box, s + 1, j + 1), d = sample(traj, box, s + 1, j);
      const double loop = increment(a, b) + increment(b, c) + increment(c, d) + increment(d, a);
      const long w = std::lround(loop / (2.0 * std::numbers::pi));
      r.max_winding = std::max(r.max_winding, std::abs(w));
      if (w != 0) ++r.nonzero;
    }
  const auto other = lift_phase_time_first(traj, box);
  for (std::size_t s = 0; s < box.num_times(); ++s)
    for (std::size_t j = 0; j < box.num_nodes(); ++j)
      r.path_difference = std::max(r.path_difference, std::abs(other.theta[s][j] - sheet.theta[s][j]));
  return r;
}

PolarResiduals polar_residuals(const PhaseSheet& sheet, const NonlinearitySpec& nl) {
  const double dt = uniform_step(sheet.times);
  const std::size_t nj = sheet.nodes.size();
  if (nj < 7) throw InvalidArgument("polar residuals: box needs at least 7 nodes");
  const double h = sheet.nodes[1] - sheet.nodes[0];

  // Term order: (a) eta_t, 2 eta' theta', eta Lap theta; (b) Lap eta,
  // F(eta) eta, theta_t eta, eta theta'^2.
  std::vector<double> a_terms(3, 0.0), b_terms(4, 0.0);
  double a_res = 0.0, b_res = 0.0;
  for (std::size_t s = 0; s < sheet.times.size(); ++s) {
    const auto& eta = sheet.eta[s];
    const auto& th = sheet.theta[s];
    for (std::size_t j = 3; j + 3 < nj; ++j) {
      const double r = sheet.nodes[j];
      const double eta_t = time_derivative(sheet.eta, s, j, dt);
      const double theta_t = time_derivative(sheet.theta, s, j, dt);
      const double eta_r = first_derivative(eta, j, h), theta_r = first_derivative(th, j, h);
      const double lap_eta = laplacian(eta, j, h, r, sheet.dimension);
      const double lap_theta = laplacian(th, j, h, r, sheet.dimension);
      const double ta[3] = {eta_t, 2.0 * eta_r * theta_r, eta[j] * lap_theta};
      const double tb[4] = {lap_eta, nl(eta[j]) * eta[j], theta_t * eta[j], eta[j] * theta_r * theta_r};
      for (int i = 0; i < 3; ++i) a_terms[i] += ta[i] * ta[i];
      for (int i = 0; i < 4; ++i) b_terms[i] += tb[i] * tb[i];
      a_res += std::pow(ta[0] - ta[1] - ta[2], 2);
      b_res += std::pow(-tb[0] + tb[1] - tb[2] + tb[3], 2);
    }
  }
  const double a_scale = std::max(*std::max_element(a_terms.begin(), a_terms.end()), b_terms[2]);
  const double b_scale = *std::max_element(b_terms.begin(), b_terms.end());
  PolarResiduals out;
  out.res_a = a_scale > 0.0 ? std::sqrt(a_res / a_scale) : 0.0;
  out.res_b = b_scale > 0.0 ? std::sqrt(b_res / b_scale) : 0.0;
  return out;
}

PhaseSlope phase_slope(const PhaseSheet& sheet) {
  const auto& times = sheet.times;
  if (times.size() < 2 || !(times.back() > times.front()))
    throw InvalidArgument("phase slope: degenerate box with zero duration");
  const double t_mid = 0.5 * (times.front() + times.back());
  std::size_t first = 0;
  while (first < times.size() && times[first] < t_mid) ++first;
  const std::size_t m = times.size() - first;
  if (m < 4) throw InvalidArgument("phase slope: fewer than 4 snapshots in the second half of the box");

  double t_bar = 0.0;
  for (std::size_t s = first; s < times.size(); ++s) t_bar += times[s];
  t_bar /= static_cast<double>(m);
  double stt = 0.0;
  for (std::size_t s = first; s < times.size(); ++s) stt += (times[s] - t_bar) * (times[s] - t_bar);

  const std::size_t nj = sheet.nodes.size();
  std::vector<double> slope(nj), intercept(nj);
  for (std::size_t j = 0; j < nj; ++j) {
    double th_bar = 0.0, sty = 0.0;
    for (std::size_t s = first; s < times.size(); ++s) th_bar += sheet.theta[s][j];
    th_bar /= static_cast<double>(m);
    for (std::size_t s = first; s < times.size(); ++s) sty += (times[s] - t_bar) * (sheet.theta[s][j] - th_bar);
    slope[j] = sty / stt;
    intercept[j] = th_bar - slope[j] * t_bar;
  }

  const std::size_t ref = sheet.box.ref_node - sheet.box.node_lo;
  PhaseSlope out;
  out.e_hat = -slope[ref];
  for (std::size_t j = 0; j < nj; ++j) out.r_spread = std::max(out.r_spread, std::abs(slope[j] - slope[ref]));
  double ss = 0.0;
  for (std::size_t s = first; s < times.size(); ++s)
    ss += std::pow(sheet.theta[s][ref] - intercept[ref] - slope[ref] * times[s], 2);
  out.fit_residual = std::sqrt(ss / static_cast<double>(m));
  const double duration = times.back() - times.front();
  out.short_box = out.e_hat == 0.0 || duration < 10.0 * 2.0 * std::numbers::pi / std::abs(out.e_hat);
  out.non_converged = out.fit_residual > 0.1 * std::abs(slope[ref] * (times.back() - times[first]));
  return out;
}

ThetaAverage theta_average_identity(const PhaseSheet& sheet, const NonlinearitySpec& nl,
                                    std::span<const double> testfn) {
  const std::size_t nj = sheet.nodes.size();
  if (testfn.size() != nj) throw InvalidArgument("theta average: test function length does not match the box");
  if (nj < 5) throw InvalidArgument("theta average: box needs at least 5 nodes");
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, nj - 2, nj - 1})
    if (testfn[j] != 0.0) throw InvalidArgument("theta average: test function must vanish on two nodes at each end");
  const double dt = uniform_step(sheet.times);
  const double duration = sheet.times.back() - sheet.times.front();
  const double h = sheet.nodes[1] - sheet.nodes[0];
  const auto measure = [&](std::size_t j) {
    const double r = sheet.nodes[j];
    return sheet.dimension == 3 ? 4.0 * std::numbers::pi * r * r * h : h;
  };

  ThetaAverage out;
  const std::size_t nt = sheet.times.size();
  for (std::size_t s = 0; s < nt; ++s) {
    const double wt = (s == 0 || s + 1 == nt) ? 0.5 * dt : dt;
    double lhs = 0.0, pgrad = 0.0;
    for (std::size_t j = 2; j + 2 < nj; ++j) {
      if (testfn[j] == 0.0) continue;
      const double e2 = sheet.eta[s][j] * sheet.eta[s][j];
      const double th_r = first_derivative(sheet.theta[s], j, h);
      lhs += measure(j) * testfn[j] * time_derivative(sheet.theta, s, j, dt) * e2;
      pgrad += measure(j) * testfn[j] * e2 * th_r * th_r;
    }
    out.lhs += wt * lhs;
    out.phase_gradient += wt * pgrad;
  }
  out.lhs /= duration;
  out.phase_gradient /= duration;

  std::vector<double> ubar(nj, 0.0);
  std::size_t count = 0;
  for (std::size_t s = 0; s < nt; ++s) {
    if (sheet.times[s] < sheet.times.front() + 0.75 * duration) continue;
    for (std::size_t j = 0; j < nj; ++j) ubar[j] += sheet.eta[s][j];
    ++count;
  }
  for (double& u : ubar) u /= static_cast<double>(count);
  for (std::size_t j = 2; j + 2 < nj; ++j) {
    if (testfn[j] == 0.0) continue;
    const double lap = laplacian(ubar, j, h, sheet.nodes[j], sheet.dimension);
    out.rhs += measure(j) * testfn[j] * ubar[j] * (-lap + nl(ubar[j]) * ubar[j]);
  }
  return out;
}

std::vector<double> box_bump(const PhaseSheet& sheet, double center, double width) {
  if (!(width > 0.0)) throw InvalidArgument("box bump: width must be positive");
  std::vector<double> phi(sheet.nodes.size(), 0.0);
  for (std::size_t j = 0; j < phi.size(); ++j) {
    const double s = (sheet.nodes[j] - center) / width;
    if (std::abs(s) < 1.0) phi[j] = std::exp(1.0 - 1.0 / (1.0 - s * s));
  }
  return phi;
}

}  // namespace solitonscope
