#include "solitonscope/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include "solitonscope/error.hpp"

namespace solitonscope {

NonlinearitySpec NonlinearitySpec::make(double power, double coefficient) {
  if (!std::isfinite(power) || power < 1.0)
    throw InvalidArgument("nonlinearity: power must be a finite exponent >= 1");
  if (!std::isfinite(coefficient))
    throw InvalidArgument("nonlinearity: coefficient must be finite");
  return {Kind::focusing_power, power, coefficient};
}

double NonlinearitySpec::operator()(double amplitude) const {
  if (coefficient == 0.0) return 0.0;
  if (power == 2.0) return coefficient * amplitude * amplitude;
  return coefficient * std::pow(amplitude, power);
}

double NonlinearitySpec::potential_density(double amplitude) const {
  if (coefficient == 0.0) return 0.0;
  return coefficient * std::pow(amplitude, power + 2.0) / (power + 2.0);
}

namespace {

// G(rho) = 2 c rho^(p/2 + 1) / (p + 2), so that G'(rho) = c rho^(p/2).
double primitive(const NonlinearitySpec& nl, double rho) {
  if (nl.power == 2.0) return 0.5 * nl.coefficient * rho * rho;
  return 2.0 * nl.coefficient * std::pow(rho, 0.5 * nl.power + 1.0) / (nl.power + 2.0);
}

}  // namespace

double NonlinearitySpec::secant_potential(double rho0, double rho1) const {
  if (coefficient == 0.0) return 0.0;
  if (power == 2.0) return 0.5 * coefficient * (rho0 + rho1);  // exact, no cancellation
  const double diff = rho1 - rho0;
  const double scale = std::max(std::abs(rho0), std::abs(rho1));
  if (std::abs(diff) <= 1e-7 * scale || scale == 0.0)
    return (*this)(std::sqrt(0.5 * (rho0 + rho1)));
  return (primitive(*this, rho1) - primitive(*this, rho0)) / diff;
}

}  // namespace solitonscope
