#include "solitonscope/wave_field.hpp"

#include <cmath>
#include <numbers>

#include "solitonscope/error.hpp"

namespace solitonscope {

WaveField::WaveField(RadialGrid g, std::vector<cplx> v, double t)
    : grid(g), values(std::move(v)), time(t) {
  if (values.size() != grid.size())
    throw InvalidArgument("wave field: sample count does not match grid");
}

WaveField WaveField::zeros(const RadialGrid& g, double t) {
  return WaveField(g, std::vector<cplx>(g.size()), t);
}

bool WaveField::all_finite() const {
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double WaveField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values) m = std::max(m, std::abs(v));
  return m;
}

std::vector<cplx> gradient(const WaveField& field) {
  const auto& g = field.grid;
  if (g.is_line()) return spectral_derivative(field.values, g.spacing());

  const auto& f = field.values;
  const std::size_t n = f.size();
  const double h = g.spacing();
  std::vector<cplx> d(n);
  d[0] = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

std::vector<cplx> to_reduced(const WaveField& field) {
  if (field.grid.is_line()) throw InvalidArgument("reduced variable needs a radial grid");
  std::vector<cplx> w(field.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = field.grid.node(k) * field.values[k];
  return w;
}

std::vector<cplx> from_reduced(const RadialGrid& grid, std::span<const cplx> w) {
  std::vector<cplx> psi(w.size());
  for (std::size_t k = 1; k < w.size(); ++k) psi[k] = w[k] / grid.node(k);
  psi[0] = (4.0 * psi[1] - psi[2]) / 3.0;
  return psi;
}

ConservedSet conserved_set(const WaveField& field, const NonlinearitySpec& nl) {
  const auto& g = field.grid;
  const auto& f = field.values;
  const std::size_t n = f.size();
  ConservedSet c;

  for (std::size_t k = 0; k < n; ++k) {
    const double wk = g.weight(k);
    const double a = std::abs(f[k]);
    const double r = g.radius(k);
    c.mass += wk * a * a;
    c.variance += wk * r * r * a * a;
    c.energy += wk * nl.potential_density(a);
  }

  if (g.is_line()) {
    const auto d = gradient(field);
    for (std::size_t k = 0; k < n; ++k) {
      c.gradient_sq += g.spacing() * std::norm(d[k]);
      c.dilation += g.spacing() * g.node(k) * (std::conj(f[k]) * d[k]).imag();
    }
  } else {
    // Summation-by-parts partner of the three-point Laplacian on w = r psi:
    // int |grad psi|^2 d^3x = 4 pi int |w'|^2 dr with w(0) = w(R) = 0, and
    // int x.J d^3x = 4 pi int r Im(conj(w) w') dr, both on cell interfaces.
    const auto w = to_reduced(field);
    const double h = g.spacing();
    const double four_pi = 4.0 * std::numbers::pi;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      c.gradient_sq += four_pi * std::norm(w[k + 1] - w[k]) / h;
      const double r_mid = g.node(k) + 0.5 * h;
      c.dilation += four_pi * r_mid * (std::conj(w[k]) * w[k + 1]).imag();
    }
  }

  c.energy += 0.5 * c.gradient_sq;
  c.h1_norm = std::sqrt(c.mass + c.gradient_sq);

  for (double v : {c.mass, c.energy, c.variance, c.dilation, c.h1_norm})
    if (!std::isfinite(v))
      throw SolverError("conserved set: non-finite functional (solver blow-up?)", -1, field.time);
  return c;
}

double periodic_hs_norm(std::span<const cplx> f, double spacing, double s) {
  std::vector<cplx> buf(f.begin(), f.end());
  Fft fft(buf.size());
  fft.forward(buf);
  const auto k = wavenumbers(buf.size(), spacing);
  double sum = 0.0;
  for (std::size_t m = 0; m < buf.size(); ++m)
    sum += std::pow(1.0 + k[m] * k[m], s) * std::norm(buf[m]);
  return std::sqrt(spacing * sum / static_cast<double>(buf.size()));
}

double weighted_norm(const WaveField& field, NormSpec norm) {
  const auto& g = field.grid;
  switch (norm.kind) {
    case NormSpec::Kind::l2:
    case NormSpec::Kind::h1:
    case NormSpec::Kind::weighted_x2: {
      const auto c = conserved_set(field, NonlinearitySpec::free());
      if (norm.kind == NormSpec::Kind::l2) return std::sqrt(c.mass);
      if (norm.kind == NormSpec::Kind::h1) return c.h1_norm;
      return std::sqrt(c.variance);
    }
    case NormSpec::Kind::lp: {
      if (!(norm.param >= 1.0)) throw InvalidArgument("lp norm: p must be >= 1");
      double sum = 0.0;
      for (std::size_t k = 0; k < field.size(); ++k)
        sum += g.weight(k) * std::pow(std::abs(field.values[k]), norm.param);
      return std::pow(sum, 1.0 / norm.param);
    }
    case NormSpec::Kind::hs: {
      if (!(norm.param >= 0.0)) throw InvalidArgument("hs norm: s must be >= 0");
      if (g.is_line()) return periodic_hs_norm(field.values, g.spacing(), norm.param);
      // For radial psi, the 3D Fourier transform is (2 pi / |xi|) times the
      // 1D transform of the odd extension W of w = r psi, which gives
      // ||psi||_{H^s(R^3)}^2 = 2 pi ||W||_{H^s(R)}^2.
      const auto w = to_reduced(field);
      const std::size_t n = w.size();
      std::vector<cplx> odd(2 * (n - 1));
      for (std::size_t k = 0; k + 1 < n; ++k) odd[k] = w[k];
      odd[n - 1] = 0.0;
      for (std::size_t k = 1; k + 1 < n; ++k) odd[2 * (n - 1) - k] = -w[k];
      const double line_norm = periodic_hs_norm(odd, g.spacing(), norm.param);
      return std::sqrt(2.0 * std::numbers::pi) * line_norm;
    }
  }
  throw InvalidArgument("unknown norm");
}

}  // namespace solitonscope
