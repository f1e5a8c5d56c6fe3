#include <cmath>
#include <numbers>

#include "doctest.h"
#include "solitonscope/error.hpp"
#include "solitonscope/soliton_profile.hpp"

using namespace solitonscope;

namespace {

const RadialGrid kLine = RadialGrid::line(20.0 * std::numbers::pi, 2048);
const RadialGrid kBall = RadialGrid::radial(30.0, 3073);

// Independent oracle: implicit-midpoint integration of the 3D cubic profile
// ODE with its own bisection on u(0). Second order, so two step sizes are
// combined by Richardson extrapolation.
double midpoint_ground_state(double h) {
  const double e = 1.0;
  const auto f = [e](double r, double u, double v) { return e * u - u * u * u - 2.0 * v / r; };
  const auto classify = [&](double a) {
    double r = h;
    double u = a + (e * a - a * a * a) * h * h / 6.0;
    double v = (e * a - a * a * a) * h / 3.0;
    while (r < 25.0) {
      if (u <= 0.0) return 1;
      if (v > 0.0) return -1;
      double un = u, vn = v;
      for (int it = 0; it < 50; ++it) {
        const double um = 0.5 * (u + un), vm = 0.5 * (v + vn);
        const double un2 = u + h * vm;
        const double vn2 = v + h * f(r + 0.5 * h, um, vm);
        const bool done = un2 == un && vn2 == vn;
        un = un2;
        vn = vn2;
        if (done) break;
      }
      u = un;
      v = vn;
      r += h;
    }
    return 0;
  };
  double lo = 3.0, hi = 6.0;
  REQUIRE(classify(lo) == -1);
  REQUIRE(classify(hi) == 1);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    const int c = classify(mid);
    if (c == 0) return mid;
    (c > 0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double sup_diff(const SolitonProfile& a, const std::function<double(double)>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.grid.size(); ++k) m = std::max(m, std::abs(a.u[k] - b(a.grid.node(k))));
  return m;
}

}  // namespace

TEST_CASE("1D cubic closed form") {
  const auto p = solve_profile_1d(1.0, NonlinearitySpec::cubic_focusing(), kLine);
  CHECK(p.u0() == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.ode_residual < 1e-12);
  CHECK(p.node_count == 0);
  CHECK(p.evaluate(0.7) == doctest::Approx(std::sqrt(2.0) / std::cosh(0.7)).epsilon(1e-7));
  CHECK(p.evaluate(-0.7) == p.evaluate(0.7));
}

TEST_CASE("1D shooting reproduces the sech profile") {
  for (double e : {0.5, 1.0, 2.0}) {
    const auto p = shoot_profile(e, NonlinearitySpec::cubic_focusing(), kLine);
    const double k = std::sqrt(e);
    const double d = sup_diff(p, [&](double x) { return std::sqrt(2 * e) / std::cosh(k * x); });
    CHECK(d <= 1e-8);
    CHECK(p.ode_residual < 1e-8);
    CHECK(p.node_count == 0);
  }
}

TEST_CASE("1D quintic shooting against its closed form") {
  // For F(s) = c s^p the 1D ground state is
  // ((p+2) E / (2|c|))^{1/p} sech^{2/p}(p sqrt(E) x / 2).
  const auto nl = NonlinearitySpec::make(4.0, -1.0);
  const double e = 1.0;
  const auto p = shoot_profile(e, nl, kLine);
  const double d = sup_diff(p, [&](double x) {
    return std::pow(3.0 * e, 0.25) * std::pow(1.0 / std::cosh(2.0 * x), 0.5);
  });
  CHECK(d <= 1e-8);
}

TEST_CASE("3D ground state against an independent integrator") {
  const auto p = solve_profile_3d(1.0, NonlinearitySpec::cubic_focusing(), kBall);
  const double coarse = midpoint_ground_state(2e-3);
  const double fine = midpoint_ground_state(1e-3);
  const double oracle = (4.0 * fine - coarse) / 3.0;
  MESSAGE("3D u(0): shooting " << p.u0() << ", oracle " << oracle);
  CHECK(std::abs(p.u0() - oracle) <= 1e-7);
  CHECK(p.ode_residual < 1e-8);
  CHECK(p.node_count == 0);
  // Frozen value from the oracle above.
  CHECK(p.u0() == doctest::Approx(4.3373876799).epsilon(1e-9));
}

TEST_CASE("scaling symmetry u_E(r) = E^{1/p} u_1(sqrt(E) r)") {
  const auto nl = NonlinearitySpec::cubic_focusing();
  const auto p1 = solve_profile_3d(1.0, nl, kBall);
  for (double e : {0.5, 2.0, 4.0}) {
    const auto pe = solve_profile_3d(e, nl, kBall);
    const double d = sup_diff(pe, [&](double r) { return std::sqrt(e) * p1.evaluate(std::sqrt(e) * r); });
    CHECK(d <= 1e-7);
  }
  const ProfileFamily fam(nl, 3);
  CHECK(fam(2.0, 0.0) == doctest::Approx(std::sqrt(2.0) * p1.u0()).epsilon(1e-9));
}

TEST_CASE("weak-form residual of returned profiles") {
  const auto nl = NonlinearitySpec::cubic_focusing();
  for (const auto& [p, n] : {std::pair{solve_profile(1.0, nl, kLine), nl}, std::pair{solve_profile(1.0, nl, kBall), nl},
                             std::pair{shoot_profile(0.5, NonlinearitySpec::make(4.0, -1.0), kLine),
                                       NonlinearitySpec::make(4.0, -1.0)}}) {
    for (const auto& c : weak_form_check(p, n)) {
      CHECK(c.passed());
      CHECK(c.center != 0.0);
    }
  }
  // A wrong energy parameter must be detected.
  auto wrong = solve_profile(1.0, nl, kLine);
  wrong.energy_param = 1.01;
  int failed = 0;
  for (const auto& c : weak_form_check(wrong, nl)) failed += c.passed() ? 0 : 1;
  CHECK(failed > 0);
}

TEST_CASE("profile distance and fit") {
  const auto nl = NonlinearitySpec::cubic_focusing();
  const auto p = solve_profile(1.0, nl, kLine);
  const Interval I{-1.5, 1.5};
  CHECK(profile_distance(p.u, p, I, DistanceNorm::l2) < 1e-14);

  std::vector<double> eta(p.u);
  for (auto& v : eta) v *= 1.001;
  double windowed_sq = 0.0;
  for (std::size_t k = 0; k < kLine.size(); ++k) {
    const double w = window(I, kLine.node(k)) * p.u[k];
    windowed_sq += kLine.spacing() * w * w;
  }
  CHECK(profile_distance(eta, p, I, DistanceNorm::l2) ==
        doctest::Approx(1e-3 * std::sqrt(windowed_sq)).epsilon(1e-2));
  CHECK(profile_distance(eta, p, I, DistanceNorm::sup) == doctest::Approx(1e-3 * std::sqrt(2.0)).epsilon(1e-6));
  CHECK(profile_distance(eta, p, I, DistanceNorm::hs, 0.0) ==
        doctest::Approx(profile_distance(eta, p, I, DistanceNorm::l2)).epsilon(1e-12));

  const auto pe = solve_profile(1.3, nl, kLine);
  const auto fit = fit_profile(pe.u, kLine, nl, I);
  CHECK(fit.energy == doctest::Approx(1.3).epsilon(1e-6));
  CHECK(fit.distance < 1e-6);

  const auto p3 = solve_profile(0.8, nl, kBall);
  const auto fit3 = fit_profile(p3.u, kBall, nl, Interval{0.0, 2.0});
  CHECK(fit3.energy == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("shooting failures") {
  const auto nl = NonlinearitySpec::cubic_focusing();
  CHECK_THROWS_AS(solve_profile_3d(1e-4, nl, kBall), BracketError);
  CHECK_THROWS_AS(solve_profile_3d(1.0, NonlinearitySpec::make(2.0, 1.0), kBall), BracketError);
  CHECK_THROWS_AS(solve_profile_3d(-1.0, nl, kBall), InvalidArgument);
  CHECK_THROWS_AS(solve_profile_1d(1.0, nl, kBall), InvalidArgument);
}
