#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "solitonscope/error.hpp"
#include "solitonscope/wave_field.hpp"

using namespace solitonscope;
using std::numbers::pi;

namespace {
WaveField gaussian(const RadialGrid& g, double chirp = 0.0) {
  std::vector<cplx> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = g.node(k);
    v[k] = std::exp(-0.5 * r * r) * std::exp(cplx(0.0, chirp * r * r));
  }
  return WaveField(g, v);
}
}  // namespace

// Closed-form Gaussian integrals: int e^{-x^2} = sqrt(pi), int x^2 e^{-x^2} =
// sqrt(pi)/2; in 3D int e^{-r^2} d^3x = pi^{3/2}, int r^2 e^{-r^2} d^3x = 3/2 pi^{3/2}.
TEST_CASE("line functionals of a chirped Gaussian") {
  const auto g = RadialGrid::line(12.0, 512);
  const double b = 0.3;
  const auto c = conserved_set(gaussian(g, b), NonlinearitySpec::free());
  CHECK(c.mass == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
  CHECK(c.variance == doctest::Approx(0.5 * std::sqrt(pi)).epsilon(1e-12));
  CHECK(c.dilation == doctest::Approx(b * std::sqrt(pi)).epsilon(1e-10));
  // |psi'|^2 = (1 + 4 b^2) x^2 e^{-x^2}
  CHECK(c.gradient_sq == doctest::Approx((1 + 4 * b * b) * 0.5 * std::sqrt(pi)).epsilon(1e-10));
}

TEST_CASE("radial functionals of a chirped Gaussian") {
  const auto g = RadialGrid::radial(12.0, 4001);
  const double b = 0.3;
  const auto c = conserved_set(gaussian(g, b), NonlinearitySpec::free());
  const double p32 = std::pow(pi, 1.5);
  CHECK(c.mass == doctest::Approx(p32).epsilon(1e-9));
  CHECK(c.variance == doctest::Approx(1.5 * p32).epsilon(1e-9));
  CHECK(c.dilation == doctest::Approx(3.0 * b * p32).epsilon(1e-5));
  CHECK(c.gradient_sq == doctest::Approx((1 + 4 * b * b) * 1.5 * p32).epsilon(1e-5));
}

TEST_CASE("soliton energy on the line") {
  // u = sqrt(2) sech x: int u'^2 = 4/3, int u^4 = 16/3, mass 4.
  const auto g = RadialGrid::line(20.0 * pi, 2048);
  std::vector<cplx> v(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) v[k] = std::sqrt(2.0) / std::cosh(g.node(k));
  const auto c = conserved_set(WaveField(g, v), NonlinearitySpec::cubic_focusing());
  CHECK(c.mass == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.energy == doctest::Approx(2.0 / 3.0 - 4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("H^s norms") {
  SUBCASE("line Gaussian") {
    const auto g = RadialGrid::line(12.0, 512);
    const auto f = gaussian(g);
    const double h1 = std::sqrt(1.5 * std::sqrt(pi));
    CHECK(weighted_norm(f, NormSpec::hs(1.0)) == doctest::Approx(h1).epsilon(1e-12));
    CHECK(weighted_norm(f, NormSpec::hs(0.0)) == doctest::Approx(weighted_norm(f, NormSpec::l2())).epsilon(1e-12));
  }
  SUBCASE("radial Gaussian") {
    const auto g = RadialGrid::radial(12.0, 1201);
    const auto f = gaussian(g);
    const double h1 = std::sqrt(2.5 * std::pow(pi, 1.5));
    CHECK(weighted_norm(f, NormSpec::hs(1.0)) == doctest::Approx(h1).epsilon(1e-10));
    CHECK(weighted_norm(f, NormSpec::hs(0.0)) == doctest::Approx(weighted_norm(f, NormSpec::l2())).epsilon(1e-10));
  }
  SUBCASE("monotone in s") {
    const auto g = RadialGrid::radial(12.0, 601);
    const auto f = gaussian(g, 0.5);
    double prev = 0.0;
    for (double s : {0.0, 0.25, 0.5, 1.0, 2.0}) {
      const double n = weighted_norm(f, NormSpec::hs(s));
      CHECK(n > prev);
      prev = n;
    }
  }
  SUBCASE("lp") {
    const auto g = RadialGrid::line(12.0, 512);
    // int e^{-2 x^2} = sqrt(pi/2)
    CHECK(weighted_norm(gaussian(g), NormSpec::lp(4.0)) ==
          doctest::Approx(std::pow(std::sqrt(pi / 2), 0.25)).epsilon(1e-12));
    CHECK_THROWS_AS(weighted_norm(gaussian(g), NormSpec::lp(0.5)), InvalidArgument);
    CHECK_THROWS_AS(weighted_norm(gaussian(g), NormSpec::hs(-1.0)), InvalidArgument);
  }
}

TEST_CASE("property: mass is invariant under global phase and scales quadratically") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto g = RadialGrid::radial(6.0, 301);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cplx> v(g.size());
    for (std::size_t k = 0; k + 1 < g.size(); ++k) v[k] = cplx(u(rng), u(rng)) * std::exp(-g.node(k));
    const WaveField f(g, v);
    const double theta = 3.0 * u(rng);
    const double a = 1.0 + u(rng);
    std::vector<cplx> w(v);
    for (auto& x : w) x *= a * std::exp(cplx(0.0, theta));
    const auto c0 = conserved_set(f, NonlinearitySpec::free());
    const auto c1 = conserved_set(WaveField(g, w), NonlinearitySpec::free());
    CHECK(c1.mass == doctest::Approx(a * a * c0.mass).epsilon(1e-12));
    CHECK(c1.gradient_sq == doctest::Approx(a * a * c0.gradient_sq).epsilon(1e-12));
    CHECK(c0.mass >= 0.0);
  }
}

TEST_CASE("reduced variable round trip") {
  const auto g = RadialGrid::radial(8.0, 401);
  const auto f = gaussian(g, 0.2);
  const auto back = from_reduced(g, to_reduced(f));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(std::abs(back[k] - f.values[k]) < 1e-13);
  CHECK(std::abs(back[0] - f.values[0]) < 1e-3);
}

TEST_CASE("non-finite field is reported") {
  const auto g = RadialGrid::line(4.0, 32);
  std::vector<cplx> v(g.size(), 1.0);
  v[3] = cplx(NAN, 0.0);
  CHECK_THROWS_AS(conserved_set(WaveField(g, v), NonlinearitySpec::free()), SolverError);
  CHECK_THROWS_AS(WaveField(g, std::vector<cplx>(5)), InvalidArgument);
}
