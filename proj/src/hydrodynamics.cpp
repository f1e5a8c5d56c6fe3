#include "solitonscope/hydrodynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "solitonscope/error.hpp"

namespace solitonscope {

namespace {

constexpr double kRelativeMask = 1e-12;
constexpr double kNodelessFloor = 1e-8;
constexpr double kStrideJump = 0.1;
constexpr double kBoundSlack = 1e-9;

// Linear interpolation on a sorted abscissa table.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const auto j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return (1.0 - t) * ys[j - 1] + t * ys[j];
}

// Linear interpolation at x on a uniform table starting at x0.
double interpolate_uniform(const std::vector<double>& v, double x0, double h, double x) {
  const double p = (x - x0) / h;
  auto k = static_cast<std::size_t>(std::floor(p));
  if (k + 1 >= v.size()) k = v.size() - 2;
  const double t = p - static_cast<double>(k);
  return (1.0 - t) * v[k] + t * v[k + 1];
}

// Integral over [a, b] of the piecewise-linear interpolant of v.
double integrate_uniform(const std::vector<double>& v, double x0, double h, double a, double b) {
  const auto cell_of = [&](double x) {
    auto k = static_cast<std::size_t>(std::floor((x - x0) / h));
    return std::min(k, v.size() - 2);
  };
  const std::size_t ka = cell_of(a), kb = cell_of(b);
  double sum = 0.0;
  for (std::size_t k = ka; k <= kb; ++k) {
    const double lo = std::max(a, x0 + static_cast<double>(k) * h);
    const double hi = std::min(b, x0 + static_cast<double>(k + 1) * h);
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    sum += (hi - lo) * interpolate_uniform(v, x0, h, mid);
  }
  return sum;
}

// Interface tables for a radial field: abscissae 0, r_{1/2}, ..., r_{N-3/2}, R_max.
std::vector<double> interface_radii(const RadialGrid& grid) {
  std::vector<double> r;
  r.reserve(grid.size() + 1);
  r.push_back(0.0);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) r.push_back(grid.node(k) + 0.5 * grid.spacing());
  r.push_back(grid.r_max());
  return r;
}

std::vector<double> interface_ball_mass(const WaveField& field) {
  const auto w = to_reduced(field);
  const double c = 4.0 * std::numbers::pi * field.grid.spacing();
  std::vector<double> m;
  m.reserve(w.size() + 1);
  m.push_back(0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    acc += c * std::norm(w[k]);
    m.push_back(acc);
  }
  m.push_back(acc);
  return m;
}

std::vector<double> interface_flux(const WaveField& field) {
  const auto w = to_reduced(field);
  const double c = 4.0 * std::numbers::pi / field.grid.spacing();
  std::vector<double> f;
  f.reserve(w.size() + 1);
  f.push_back(0.0);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) f.push_back(c * (std::conj(w[k]) * w[k + 1]).imag());
  f.push_back(0.0);
  return f;
}

double line_flux(const HydroFrame& frame, double radius) {
  const auto& g = frame.grid;
  return interpolate_uniform(frame.current, g.r_min(), g.spacing(), radius) -
         interpolate_uniform(frame.current, g.r_min(), g.spacing(), -radius);
}

void check_radius(const RadialGrid& grid, double radius) {
  const double lo = grid.is_line() ? 0.0 : 0.5 * grid.spacing();
  if (!(radius > lo && radius <= grid.max_radius())) {
    std::ostringstream msg;
    msg << "radius " << radius << " is outside the grid (" << lo << ", " << grid.max_radius() << "]";
    throw InvalidArgument(msg.str());
  }
}

}  // namespace

HydroFrame hydro_frame(const WaveField& field) {
  double rho_max = 0.0;
  for (const auto& v : field.values) rho_max = std::max(rho_max, std::norm(v));
  // All-zero fields get a positive threshold so every node is masked.
  const double eps = rho_max > 0.0 ? kRelativeMask * rho_max : std::numeric_limits<double>::min();
  return hydro_frame(field, eps);
}

HydroFrame hydro_frame(const WaveField& field, double eps_zero) {
  if (!(eps_zero > 0.0)) throw InvalidArgument("hydro frame: eps_zero must be positive");
  const std::size_t n = field.size();
  HydroFrame h{field.grid, field.time, std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
               std::vector<double>(n), std::vector<bool>(n)};
  const auto d = gradient(field);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx psi = field.values[k];
    h.rho[k] = std::norm(psi);
    h.eta[k] = std::abs(psi);
    h.current[k] = (std::conj(psi) * d[k]).imag();
    h.zero_set_mask[k] = h.rho[k] < eps_zero;
    h.velocity[k] = h.zero_set_mask[k] ? 0.0 : h.current[k] / h.rho[k];
  }
  return h;
}

IwcResult iwc_indicator(const HydroFrame& frame) {
  double jmax = 0.0;
  for (double j : frame.current) jmax = std::max(jmax, std::abs(j));
  return iwc_indicator(frame, kRelativeMask * jmax);
}

IwcResult iwc_indicator(const HydroFrame& frame, double tol) {
  IwcResult r;
  for (std::size_t k = 0; k < frame.rho.size(); ++k) {
    const double x = frame.grid.node(k);
    const double r_hat = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    r.worst = std::max(r.worst, frame.rho[k] * frame.velocity[k] * r_hat);
  }
  r.satisfied = r.worst <= tol;
  return r;
}

double KineticSplitting::relative_error() const {
  if (grad_psi_sq == 0.0) return 0.0;
  return std::abs(grad_psi_sq - grad_eta_sq - eta_v_sq) / grad_psi_sq;
}

KineticSplitting kinetic_splitting(const WaveField& field) {
  const auto d = gradient(field);
  KineticSplitting s;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double w = field.grid.weight(k);
    s.grad_psi_sq += w * std::norm(d[k]);
    const double rho = std::norm(field.values[k]);
    if (rho == 0.0) continue;
    const cplx z = std::conj(field.values[k]) * d[k];
    s.grad_eta_sq += w * z.real() * z.real() / rho;
    s.eta_v_sq += w * z.imag() * z.imag() / rho;
  }
  return s;
}

bool is_nodeless(const WaveField& field) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const auto& g = field.grid;
  for (std::size_t k = 0; k < field.size(); ++k) {
    // The radial wall value is pinned to zero by the boundary condition.
    if (!g.is_line() && k + 1 == field.size()) continue;
    const double rho = std::norm(field.values[k]);
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  return hi > 0.0 && lo >= kNodelessFloor * hi;
}

double mass_in_ball(const WaveField& field, double radius) {
  const auto& g = field.grid;
  check_radius(g, radius);
  if (!g.is_line()) return interpolate(interface_radii(g), interface_ball_mass(field), radius);
  std::vector<double> rho(field.size());
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = std::norm(field.values[k]);
  return integrate_uniform(rho, g.r_min(), g.spacing(), -radius, radius);
}

double FluxSeries::balance_defect() const {
  double worst = 0.0;
  for (std::size_t s = 0; s < times.size(); ++s)
    for (std::size_t j = 0; j < radii.size(); ++j)
      worst = std::max(worst, std::abs(2.0 * cumulative[s][j] + ball_mass[s][j] - ball_mass[0][j]));
  return worst;
}

bool FluxSeries::within_incoming_bound(std::size_t count) const {
  for (std::size_t s = 0; s < std::min(count, cumulative.size()); ++s)
    for (double c : cumulative[s])
      if (c > kBoundSlack || -c > 0.5 * initial_mass + kBoundSlack) return false;
  return true;
}

FluxSeries flux_series(const Trajectory& traj, const std::vector<double>& radii) {
  if (traj.size() == 0) throw InvalidArgument("flux series: empty trajectory");
  const auto& grid = traj.grid();
  if (!std::is_sorted(radii.begin(), radii.end())) throw InvalidArgument("flux series: radii must be sorted");
  for (double r : radii) check_radius(grid, r);

  FluxSeries fs;
  fs.radii = radii;
  fs.initial_mass = traj.conserved.empty() ? conserved_set(traj.snapshots.front(), traj.nl).mass
                                           : traj.conserved.front().mass;
  const std::size_t nt = traj.size(), nr = radii.size();
  fs.flux.assign(nt, std::vector<double>(nr, 0.0));
  fs.cumulative.assign(nt, std::vector<double>(nr, 0.0));
  fs.ball_mass.assign(nt, std::vector<double>(nr, 0.0));

  const bool ledger = !grid.is_line() && traj.interface_flux.size() == nt;
  const auto rs = grid.is_line() ? std::vector<double>{} : interface_radii(grid);
  std::vector<double> ledger_sum(rs.size(), 0.0);

  for (std::size_t s = 0; s < nt; ++s) {
    const auto& field = traj.snapshots[s];
    fs.times.push_back(field.time);
    if (grid.is_line()) {
      const auto frame = hydro_frame(field);
      for (std::size_t j = 0; j < nr; ++j) {
        fs.flux[s][j] = line_flux(frame, radii[j]);
        fs.ball_mass[s][j] = mass_in_ball(field, radii[j]);
      }
    } else {
      const auto f = interface_flux(field);
      const auto m = interface_ball_mass(field);
      if (ledger)
        for (std::size_t k = 0; k < traj.interface_flux[s].size(); ++k) ledger_sum[k + 1] += traj.interface_flux[s][k];
      for (std::size_t j = 0; j < nr; ++j) {
        fs.flux[s][j] = interpolate(rs, f, radii[j]);
        fs.ball_mass[s][j] = interpolate(rs, m, radii[j]);
        if (ledger) fs.cumulative[s][j] = interpolate(rs, ledger_sum, radii[j]);
      }
    }
  }

  if (!ledger) {
    double fmax = 0.0;
    for (const auto& row : fs.flux)
      for (double v : row) fmax = std::max(fmax, std::abs(v));
    bool jumpy = false;
    for (std::size_t s = 1; s < nt; ++s) {
      const double dt = fs.times[s] - fs.times[s - 1];
      for (std::size_t j = 0; j < nr; ++j) {
        fs.cumulative[s][j] = fs.cumulative[s - 1][j] + 0.5 * dt * (fs.flux[s][j] + fs.flux[s - 1][j]);
        if (std::abs(fs.flux[s][j] - fs.flux[s - 1][j]) > kStrideJump * fmax) jumpy = true;
      }
    }
    if (jumpy)
      fs.warnings.push_back("flux changes by more than 10% of its maximum between snapshots; reduce output_stride");
  }
  return fs;
}

FluxLimitReport flux_limit_checks(const FluxSeries& series, double rel_tol) {
  FluxLimitReport r;
  if (series.radii.empty()) return r;
  double fmax = 0.0;
  for (const auto& row : series.flux) {
    r.inner_sup = std::max(r.inner_sup, std::abs(row.front()));
    r.outer_sup = std::max(r.outer_sup, std::abs(row.back()));
    for (double v : row) fmax = std::max(fmax, std::abs(v));
  }
  r.tolerance = rel_tol * fmax;
  return r;
}

VelocityDecay velocity_decay_on_interval(const Trajectory& traj, Interval interval, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("velocity decay: delta must be positive");
  const auto& grid = traj.grid();
  if (!(interval.lo < interval.hi) || interval.lo < grid.node(0) || interval.hi > grid.node(grid.size() - 1))
    throw InvalidArgument("velocity decay: interval must lie inside the grid");

  VelocityDecay out;
  out.min_eta = std::numeric_limits<double>::infinity();
  double integral = 0.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const auto frame = hydro_frame(traj.snapshots[s]);
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (!interval.contains(grid.node(k))) continue;
      sum += grid.weight(k) * frame.velocity[k] * frame.velocity[k];
      out.min_eta = std::min(out.min_eta, frame.eta[k]);
    }
    const double t = traj.time(s);
    out.times.push_back(t);
    out.norm.push_back(std::sqrt(sum));
    if (s > 0) integral += 0.5 * (t - out.times[s - 1]) * (out.norm[s] + out.norm[s - 1]);
    const double elapsed = t - out.times.front();
    out.running_average.push_back(elapsed > 0.0 ? integral / elapsed : out.norm.front());
  }
  out.floor_violated = out.min_eta < delta;
  return out;
}

}  // namespace solitonscope
