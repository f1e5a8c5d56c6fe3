#pragma once

#include <span>
#include <vector>

#include "solitonscope/grid.hpp"
#include "solitonscope/nonlinearity.hpp"
#include "solitonscope/spectral.hpp"

namespace solitonscope {

/// Complex samples psi(x_k, t) on a grid at one instant.
struct WaveField {
  RadialGrid grid;
  std::vector<cplx> values;
  double time = 0.0;

  WaveField(RadialGrid g, std::vector<cplx> v, double t = 0.0);
  static WaveField zeros(const RadialGrid& g, double t = 0.0);

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
  double max_abs() const;
};

/// Mass, energy, variance, dilation and H^1 norm of one field.
///
///   mass     = int |psi|^2
///   energy   = (1/2) int |grad psi|^2 + int Ftilde(|psi|) |psi|^2
///   variance = int |x|^2 |psi|^2
///   dilation = int x . J,  J = Im(conj(psi) grad psi)
///   h1_norm  = sqrt(mass + int |grad psi|^2)
struct ConservedSet {
  double mass = 0.0;
  double energy = 0.0;
  double variance = 0.0;
  double dilation = 0.0;
  double h1_norm = 0.0;
  /// int |grad psi|^2, kept alongside since the virial identity uses it.
  double gradient_sq = 0.0;
};

/// Gradient (radial derivative in 3D) with the solver's derivative operator:
/// spectral on the line; second-order centered differences on the radial
/// grid with psi'(0) = 0 and a one-sided stencil at R_max.
std::vector<cplx> gradient(const WaveField& field);

/// Radial grids only: w_k = r_k psi_k, the variable the radial solver evolves.
std::vector<cplx> to_reduced(const WaveField& field);
/// Inverse of to_reduced. psi(0) uses the second-order Neumann closure
/// psi_0 = (4 psi_1 - psi_2) / 3.
std::vector<cplx> from_reduced(const RadialGrid& grid, std::span<const cplx> w);

/// Throws SolverError if any intermediate is non-finite.
ConservedSet conserved_set(const WaveField& field, const NonlinearitySpec& nl);

struct NormSpec {
  enum class Kind { l2, h1, lp, hs, weighted_x2 };
  Kind kind = Kind::l2;
  double param = 0.0;

  static NormSpec l2() { return {Kind::l2, 0.0}; }
  static NormSpec h1() { return {Kind::h1, 0.0}; }
  static NormSpec lp(double p) { return {Kind::lp, p}; }
  static NormSpec hs(double s) { return {Kind::hs, s}; }
  static NormSpec weighted_x2() { return {Kind::weighted_x2, 0.0}; }
};

/// Norms of a field. hs(s) uses the Fourier multiplier (1 + |xi|^2)^(s/2):
/// on the line directly on the periodic samples, on the radial grid through
/// the odd extension of r psi (the exact 3D radial Fourier transform).
double weighted_norm(const WaveField& field, NormSpec norm);

/// H^s norm of periodic samples f with the given spacing (1D measure).
double periodic_hs_norm(std::span<const cplx> f, double spacing, double s);

}  // namespace solitonscope
