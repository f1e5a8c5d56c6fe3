#pragma once

namespace solitonscope {

/// Power-law nonlinearity F(s) = coefficient * s^power, s = |psi| >= 0.
///
/// The equation being integrated is i psi_t = -Laplace psi + F(|psi|) psi.
/// Cubic focusing (the default) is power = 2, coefficient = -1.
struct NonlinearitySpec {
  enum class Kind { focusing_power };

  Kind kind = Kind::focusing_power;
  double power = 2.0;
  double coefficient = -1.0;

  static NonlinearitySpec cubic_focusing() { return {}; }
  static NonlinearitySpec free() { return {Kind::focusing_power, 2.0, 0.0}; }
  static NonlinearitySpec make(double power, double coefficient);

  bool is_free() const { return coefficient == 0.0; }
  bool is_focusing() const { return coefficient < 0.0; }

  /// F(s) for amplitude s >= 0.
  double operator()(double amplitude) const;

  /// Potential energy density Ftilde(s) s^2 = coefficient s^(p+2) / (p+2).
  /// Paired with the kinetic density (1/2)|grad psi|^2 this makes
  /// (1/2) int |grad psi|^2 + int Ftilde(|psi|)|psi|^2 a conserved quantity.
  double potential_density(double amplitude) const;

  /// Averaged potential for the conservative Crank-Nicolson update:
  /// (G(rho1) - G(rho0)) / (rho1 - rho0) with G' (rho) = F(sqrt(rho)).
  /// Falls back to F at the mean density when the two densities coincide.
  double secant_potential(double rho0, double rho1) const;

  bool operator==(const NonlinearitySpec&) const = default;
};

}  // namespace solitonscope
