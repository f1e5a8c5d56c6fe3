#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "solitonscope/nonlinearity.hpp"
#include "solitonscope/wave_field.hpp"

namespace solitonscope {

enum class Method { split_step_fourier, crank_nicolson_radial };

Method parse_method(std::string_view name);
std::string_view method_name(Method method);
/// split_step_fourier for line grids, crank_nicolson_radial for radial ones.
Method default_method(const RadialGrid& grid);

struct SolverConfig {
  Method method = Method::split_step_fourier;
  double dt = 1e-3;
  double t_final = 1.0;
  int output_stride = 1;
  double picard_tol = 1e-12;
  int picard_max_iter = 50;
  /// Optional absorbing layer: psi is damped by exp(-sigma(r) dt) each step,
  /// sigma ramping from 0 to sponge_strength over the outer sponge_width.
  /// Off by default since it breaks conservation.
  double sponge_width = 0.0;
  double sponge_strength = 0.0;

  long num_steps() const;
  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;

  bool operator==(const SolverConfig&) const = default;
};

/// Output of evolve(): snapshots every output_stride steps including t = 0.
struct Trajectory {
  std::vector<WaveField> snapshots;
  std::vector<ConservedSet> conserved;
  /// |mass(t) - mass(0)| / mass(0) per snapshot (0 for zero data).
  std::vector<double> mass_drift;
  /// Advisory findings, e.g. a time step above the stability margin.
  std::vector<std::string> warnings;

  /// Radial runs only. interface_flux[s][k] is the time integral, over the
  /// output interval ending at snapshot s, of the discrete sphere flux
  /// through r_{k+1/2}: 4 pi Im(conj(w_k) w_{k+1}) / h evaluated at the
  /// Crank-Nicolson midpoint of every step. Row 0 is all zeros. With it the
  /// ball masses obey M(t_s) - M(t_{s-1}) = -2 interface_flux[s] exactly.
  std::vector<std::vector<double>> interface_flux;

  NonlinearitySpec nl;
  SolverConfig config;

  std::size_t size() const { return snapshots.size(); }
  double time(std::size_t s) const { return snapshots[s].time; }
  const RadialGrid& grid() const { return snapshots.front().grid; }
};

/// Integrates i psi_t = -Laplace psi + F(|psi|) psi.
///
/// Line grids: Strang splitting, half kinetic step in Fourier space, exact
/// nonlinear phase rotation, half kinetic step. Radial grids: Crank-Nicolson
/// on w = r psi with w(0) = w(R_max) = 0 and the averaged potential
/// (G(|psi^{n+1}|^2) - G(|psi^n|^2)) / (|psi^{n+1}|^2 - |psi^n|^2), solved by
/// Picard iteration; this conserves the discrete mass and energy.
///
/// Throws SolverError naming the first step whose relative mass drift
/// exceeds 1e-3, that turns non-finite, or whose Picard iteration stalls.
Trajectory evolve(const WaveField& initial, const NonlinearitySpec& nl, const SolverConfig& cfg);

/// Closed-form trajectory psi(t) = e^(i E t) psi_0 of a standing wave,
/// sampled like evolve() would with the given config. Conserved sets are
/// evaluated on every snapshot; no time stepping is involved.
Trajectory standing_wave_trajectory(const WaveField& profile, double energy, const NonlinearitySpec& nl,
                                    const SolverConfig& cfg);

/// One step of the selected method; bit-identical for identical inputs.
/// dt may be negative, which runs the scheme backward in time.
WaveField step_once(const WaveField& field, const NonlinearitySpec& nl, double dt, Method method);

}  // namespace solitonscope
