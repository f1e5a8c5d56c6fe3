#include "solitonscope/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "solitonscope/error.hpp"
#include "solitonscope/spectral.hpp"

namespace solitonscope {

Method parse_method(std::string_view name) {
  if (name == "split_step_fourier") return Method::split_step_fourier;
  if (name == "crank_nicolson_radial") return Method::crank_nicolson_radial;
  throw InvalidArgument("unknown solver method '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  return method == Method::split_step_fourier ? "split_step_fourier" : "crank_nicolson_radial";
}

Method default_method(const RadialGrid& grid) {
  return grid.is_line() ? Method::split_step_fourier : Method::crank_nicolson_radial;
}

long SolverConfig::num_steps() const { return std::lround(t_final / dt); }

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("solver: dt must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw InvalidArgument("solver: t_final must be positive");
  if (output_stride < 1) throw InvalidArgument("solver: output_stride must be >= 1");
  if (!(picard_tol > 0.0 && picard_tol <= 1e-6)) throw InvalidArgument("solver: picard_tol must lie in (0, 1e-6]");
  if (picard_max_iter < 3) throw InvalidArgument("solver: picard_max_iter must be >= 3");
  if (sponge_width < 0.0 || sponge_strength < 0.0) throw InvalidArgument("solver: sponge parameters must be >= 0");
  const long n = num_steps();
  if (n < 1 || std::abs(static_cast<double>(n) * dt - t_final) > 1e-9 * t_final)
    throw InvalidArgument("solver: t_final must be a whole number of steps");
  if (n % output_stride != 0) throw InvalidArgument("solver: step count must be a multiple of output_stride");
}

namespace {

constexpr double kBlowUpDrift = 1e-3;

void check_compatible(const RadialGrid& grid, Method method) {
  if (method != default_method(grid))
    throw InvalidArgument("solver: method " + std::string(method_name(method)) + " does not match a " +
                          std::to_string(grid.dimension()) + "D grid");
}

// Damping rates of the optional sponge; empty when disabled.
std::vector<double> sponge_profile(const RadialGrid& grid, const SolverConfig& cfg) {
  if (cfg.sponge_width <= 0.0 || cfg.sponge_strength <= 0.0) return {};
  std::vector<double> s(grid.size(), 0.0);
  const double edge = grid.r_max() - cfg.sponge_width;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double r = grid.radius(k);
    if (r <= edge) continue;
    const double x = std::min(1.0, (r - edge) / cfg.sponge_width);
    s[k] = cfg.sponge_strength * 0.5 * (1.0 - std::cos(std::numbers::pi * x));
  }
  return s;
}

// Strang splitting L(dt/2) N(dt) L(dt/2) for the periodic line.
class SplitStep {
 public:
  SplitStep(const RadialGrid& grid, const NonlinearitySpec& nl, double dt)
      : nl_(nl), dt_(dt), fft_(grid.size()), half_(grid.size()), full_(grid.size()) {
    const auto k = wavenumbers(grid.size(), grid.spacing());
    for (std::size_t m = 0; m < k.size(); ++m) {
      half_[m] = std::exp(cplx(0.0, -0.5 * k[m] * k[m] * dt));
      full_[m] = std::exp(cplx(0.0, -k[m] * k[m] * dt));
    }
  }

  void kinetic(std::vector<cplx>& psi, bool half) {
    fft_.forward(psi);
    const auto& prop = half ? half_ : full_;
    for (std::size_t m = 0; m < psi.size(); ++m) psi[m] *= prop[m];
    fft_.backward(psi);
  }

  void nonlinear(std::vector<cplx>& psi) const {
    if (nl_.is_free()) return;
    for (auto& v : psi) v *= std::exp(cplx(0.0, -nl_(std::abs(v)) * dt_));
  }

 private:
  NonlinearitySpec nl_;
  double dt_;
  Fft fft_;
  std::vector<cplx> half_;
  std::vector<cplx> full_;
};

// Crank-Nicolson on w = r psi, interior unknowns w_1 .. w_{N-2}.
class RadialCrankNicolson {
 public:
  RadialCrankNicolson(const RadialGrid& grid, const NonlinearitySpec& nl, double dt, double tol, int max_iter)
      : grid_(grid), nl_(nl), dt_(dt), tol_(tol), max_iter_(max_iter), n_(grid.size()),
        q_(n_, 0.0), rhs_(n_), diag_(n_), scratch_(n_), guess_(n_), mid_(n_) {}

  // Advances w in place. `prev` (may be empty) is the state one step back and
  // seeds the Picard iteration by linear extrapolation. Adds dt times the
  // midpoint interface flux to flux_acc when it is non-null.
  void step(std::vector<cplx>& w, const std::vector<cplx>& prev, long step_index, double t,
            std::vector<double>* flux_acc) {
    const double h = grid_.spacing();
    const double a = 0.5 * dt_ / (h * h);
    double scale = 0.0;
    for (const auto& v : w) scale = std::max(scale, std::abs(v));

    if (prev.size() == n_)
      for (std::size_t k = 0; k < n_; ++k) guess_[k] = 2.0 * w[k] - prev[k];
    else
      guess_ = w;
    guess_.front() = guess_.back() = 0.0;

    const int iterations = nl_.is_free() ? 1 : max_iter_;
    bool converged = nl_.is_free() || scale == 0.0;
    for (int it = 0; it < iterations; ++it) {
      for (std::size_t k = 1; k + 1 < n_; ++k) {
        const double r2 = grid_.node(k) * grid_.node(k);
        q_[k] = nl_.secant_potential(std::norm(w[k]) / r2, std::norm(guess_[k]) / r2);
      }
      solve(w, a);
      double change = 0.0;
      for (std::size_t k = 1; k + 1 < n_; ++k) change = std::max(change, std::abs(scratch_[k] - guess_[k]));
      std::swap(guess_, scratch_);
      if (change <= tol_ * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "solver: Picard iteration did not converge at step " << step_index << " (t = " << t << ")";
      throw SolverError(msg.str(), step_index, t);
    }

    if (flux_acc) {
      const double c = 4.0 * std::numbers::pi / h * dt_;
      for (std::size_t k = 0; k < n_; ++k) mid_[k] = 0.5 * (w[k] + guess_[k]);
      for (std::size_t k = 0; k + 1 < n_; ++k) (*flux_acc)[k] += c * (std::conj(mid_[k]) * mid_[k + 1]).imag();
    }
    w.swap(guess_);
  }

 private:
  // (I + i dt/2 H) x = (I - i dt/2 H) w with H = -D2 + diag(q), x -> scratch_.
  void solve(const std::vector<cplx>& w, double a) {
    const cplx i(0.0, 1.0);
    const double half_dt = 0.5 * dt_;
    const cplx off = -i * a;
    for (std::size_t k = 1; k + 1 < n_; ++k) {
      const cplx lap = (w[k + 1] - 2.0 * w[k] + w[k - 1]);
      // (H w)_k * dt/2 = -a * lap + dt/2 * q_k * w_k
      rhs_[k] = w[k] - i * (-a * lap + half_dt * q_[k] * w[k]);
      diag_[k] = 1.0 + i * (2.0 * a + half_dt * q_[k]);
    }
    // Thomas algorithm with constant off-diagonals.
    std::vector<cplx>& c = mid_;  // modified super-diagonal, reuses scratch space
    const std::size_t first = 1, last = n_ - 2;
    c[first] = off / diag_[first];
    scratch_[first] = rhs_[first] / diag_[first];
    for (std::size_t k = first + 1; k <= last; ++k) {
      const cplx denom = diag_[k] - off * c[k - 1];
      c[k] = off / denom;
      scratch_[k] = (rhs_[k] - off * scratch_[k - 1]) / denom;
    }
    for (std::size_t k = last; k > first; --k) scratch_[k - 1] -= c[k - 1] * scratch_[k];
    scratch_.front() = scratch_.back() = 0.0;
  }

  RadialGrid grid_;
  NonlinearitySpec nl_;
  double dt_;
  double tol_;
  int max_iter_;
  std::size_t n_;
  std::vector<double> q_;
  std::vector<cplx> rhs_, diag_, scratch_, guess_, mid_;
};

double reduced_mass(const std::vector<cplx>& w, double h) {
  double s = 0.0;
  for (const auto& v : w) s += std::norm(v);
  return 4.0 * std::numbers::pi * h * s;
}

double line_mass(const std::vector<cplx>& psi, double h) {
  double s = 0.0;
  for (const auto& v : psi) s += std::norm(v);
  return h * s;
}

// Per-step health check shared by both methods.
class HealthMonitor {
 public:
  HealthMonitor(double mass0, bool damped) : mass0_(mass0), damped_(damped) {}

  void check(double mass, long step, double t) const {
    if (!std::isfinite(mass)) {
      std::ostringstream msg;
      msg << "solver: non-finite field at step " << step << " (t = " << t << ")";
      throw SolverError(msg.str(), step, t);
    }
    if (mass0_ <= 0.0) return;
    const double drift = (mass - mass0_) / mass0_;
    if (drift > kBlowUpDrift || (!damped_ && -drift > kBlowUpDrift)) {
      std::ostringstream msg;
      msg << "solver: relative mass drift " << drift << " exceeds " << kBlowUpDrift << " at step " << step
          << " (t = " << t << ")";
      throw SolverError(msg.str(), step, t);
    }
  }

 private:
  double mass0_;
  bool damped_;
};

void apply_sponge(std::vector<cplx>& v, const std::vector<double>& sigma, double dt) {
  for (std::size_t k = 0; k < sigma.size(); ++k)
    if (sigma[k] > 0.0) v[k] *= std::exp(-sigma[k] * dt);
}

void record(Trajectory& traj, WaveField field, const NonlinearitySpec& nl) {
  traj.conserved.push_back(conserved_set(field, nl));
  const double m0 = traj.conserved.front().mass;
  const double m = traj.conserved.back().mass;
  traj.mass_drift.push_back(m0 > 0.0 ? std::abs(m - m0) / m0 : 0.0);
  traj.snapshots.push_back(std::move(field));
}

}  // namespace

Trajectory evolve(const WaveField& initial, const NonlinearitySpec& nl, const SolverConfig& cfg) {
  cfg.validate();
  const auto& grid = initial.grid;
  check_compatible(grid, cfg.method);
  if (!initial.all_finite()) throw InvalidArgument("solver: initial data is not finite");

  Trajectory traj;
  traj.nl = nl;
  traj.config = cfg;
  const long n_steps = cfg.num_steps();
  const long stride = cfg.output_stride;
  const double h = grid.spacing();
  const auto sigma = sponge_profile(grid, cfg);
  const double t0 = initial.time;
  const auto time_at = [&](long step) { return t0 + static_cast<double>(step) * cfg.dt; };

  if (cfg.method == Method::split_step_fourier) {
    std::vector<cplx> psi = initial.values;
    record(traj, WaveField(grid, psi, t0), nl);
    const HealthMonitor health(line_mass(psi, h), !sigma.empty());
    SplitStep ss(grid, nl, cfg.dt);
    for (long step = 0; step < n_steps; step += stride) {
      // Adjacent kinetic half steps inside one output interval are fused.
      ss.kinetic(psi, true);
      for (long j = 0; j < stride; ++j) {
        ss.nonlinear(psi);
        if (!sigma.empty()) apply_sponge(psi, sigma, cfg.dt);
        ss.kinetic(psi, j + 1 == stride);
        health.check(line_mass(psi, h), step + j + 1, time_at(step + j + 1));
      }
      record(traj, WaveField(grid, psi, time_at(step + stride)), nl);
    }
    return traj;
  }

  std::vector<cplx> w = to_reduced(initial);
  w.front() = 0.0;
  w.back() = 0.0;
  record(traj, WaveField(grid, from_reduced(grid, w), t0), nl);
  traj.interface_flux.emplace_back(grid.size() - 1, 0.0);
  if (cfg.dt > 0.5 * h * h) {
    std::ostringstream msg;
    msg << "dt = " << cfg.dt << " exceeds the advisory margin 0.5 h^2 = " << 0.5 * h * h;
    traj.warnings.push_back(msg.str());
  }
  const HealthMonitor health(reduced_mass(w, h), !sigma.empty());
  RadialCrankNicolson cn(grid, nl, cfg.dt, cfg.picard_tol, cfg.picard_max_iter);
  std::vector<cplx> prev;
  std::vector<cplx> next;
  for (long step = 0; step < n_steps; step += stride) {
    std::vector<double> flux(grid.size() - 1, 0.0);
    for (long j = 0; j < stride; ++j) {
      next = w;
      cn.step(next, prev, step + j + 1, time_at(step + j), &flux);
      if (!sigma.empty()) apply_sponge(next, sigma, cfg.dt);
      prev.swap(w);
      w.swap(next);
      health.check(reduced_mass(w, h), step + j + 1, time_at(step + j + 1));
    }
    traj.interface_flux.push_back(std::move(flux));
    record(traj, WaveField(grid, from_reduced(grid, w), time_at(step + stride)), nl);
  }
  return traj;
}

Trajectory standing_wave_trajectory(const WaveField& profile, double energy, const NonlinearitySpec& nl,
                                    const SolverConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  traj.nl = nl;
  traj.config = cfg;
  const long n_steps = cfg.num_steps();
  for (long step = 0; step <= n_steps; step += cfg.output_stride) {
    const double t = profile.time + static_cast<double>(step) * cfg.dt;
    const cplx phase = std::exp(cplx(0.0, energy * (t - profile.time)));
    WaveField f = profile;
    f.time = t;
    for (auto& v : f.values) v *= phase;
    record(traj, std::move(f), nl);
    if (!profile.grid.is_line()) traj.interface_flux.emplace_back(profile.size() - 1, 0.0);
  }
  return traj;
}

WaveField step_once(const WaveField& field, const NonlinearitySpec& nl, double dt, Method method) {
  const auto& grid = field.grid;
  check_compatible(grid, method);
  if (dt == 0.0 || !std::isfinite(dt)) throw InvalidArgument("solver: dt must be finite and nonzero");
  if (method == Method::split_step_fourier) {
    std::vector<cplx> psi = field.values;
    SplitStep ss(grid, nl, dt);
    ss.kinetic(psi, true);
    ss.nonlinear(psi);
    ss.kinetic(psi, true);
    return WaveField(grid, std::move(psi), field.time + dt);
  }
  std::vector<cplx> w = to_reduced(field);
  w.front() = 0.0;
  w.back() = 0.0;
  RadialCrankNicolson cn(grid, nl, dt, 1e-13, 100);
  cn.step(w, {}, 1, field.time, nullptr);
  return WaveField(grid, from_reduced(grid, w), field.time + dt);
}

}  // namespace solitonscope
