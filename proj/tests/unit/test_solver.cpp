#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "solitonscope/error.hpp"
#include "solitonscope/initial_conditions.hpp"
#include "solitonscope/solver.hpp"

using namespace solitonscope;

namespace {

const RadialGrid kLine = RadialGrid::line(20.0 * std::numbers::pi, 2048);
const RadialGrid kBall = RadialGrid::radial(30.0, 3073);
const NonlinearitySpec kCubic = NonlinearitySpec::cubic_focusing();
const NonlinearitySpec kFree = NonlinearitySpec::free();

double l2_diff(const WaveField& a, const WaveField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a.grid.weight(k) * std::norm(a.values[k] - b.values[k]);
  return std::sqrt(s);
}

double l2(const WaveField& a) { return weighted_norm(a, NormSpec::l2()); }

SolverConfig config(const RadialGrid& grid, double dt, double t_final, int stride) {
  SolverConfig cfg;
  cfg.method = default_method(grid);
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.output_stride = stride;
  return cfg;
}

WaveField soliton(const RadialGrid& grid, double e = 1.0) {
  return make_initial_condition(Recipe::exact_soliton, {{"energy", e}}, grid);
}

WaveField lens(const RadialGrid& grid, double b = 0.5) {
  return make_initial_condition(Recipe::gaussian_lens, {{"amplitude", 1.0}, {"width", 1.0}, {"b", b}}, grid);
}

// Free Schrodinger evolution of A exp(-a r^2), a = 1/(2 w^2) + i b, in n dimensions.
cplx free_gaussian(double r, double t, double b, int n) {
  const cplx a(0.5, b);
  const cplx d = 1.0 + cplx(0.0, 4.0) * a * t;
  return std::pow(d, -0.5 * n) * std::exp(-a * r * r / d);
}

WaveField repeat_step(WaveField f, const NonlinearitySpec& nl, double dt, int n) {
  const auto m = default_method(f.grid);
  for (int i = 0; i < n; ++i) f = step_once(f, nl, dt, m);
  return f;
}

}  // namespace

TEST_CASE("split-step keeps the 1D soliton stationary") {
  const auto traj = evolve(soliton(kLine), kCubic, config(kLine, 1e-3, 10.0, 1000));
  REQUIRE(traj.size() == 11);
  const auto& c0 = traj.conserved.front();
  const auto& c1 = traj.conserved.back();
  CHECK(traj.mass_drift.back() <= 1e-10 * 10.0);
  CHECK(std::abs(c1.energy - c0.energy) / std::abs(c0.energy) <= 1e-8 * 10.0);

  const auto& last = traj.snapshots.back();
  CHECK(last.time == doctest::Approx(10.0).epsilon(1e-15));
  double s = 0.0;
  for (std::size_t k = 0; k < kLine.size(); ++k) {
    const double u = std::sqrt(2.0) / std::cosh(kLine.node(k));
    s += kLine.spacing() * std::pow(std::abs(last.values[k]) - u, 2);
  }
  CHECK(std::sqrt(s) < 1e-6);
}

TEST_CASE("time stamps are uniform and strictly increasing") {
  const auto traj = evolve(lens(kLine), kCubic, config(kLine, 1e-3, 0.5, 50));
  REQUIRE(traj.size() == 11);
  for (std::size_t s = 0; s < traj.size(); ++s) CHECK(traj.time(s) == doctest::Approx(0.05 * s).epsilon(1e-14));
  CHECK(traj.interface_flux.empty());
}

TEST_CASE("zero data stays zero") {
  for (const auto& grid : {kLine, kBall}) {
    const auto traj = evolve(WaveField::zeros(grid), kCubic, config(grid, 1e-3, 0.1, 10));
    for (const auto& f : traj.snapshots) CHECK(f.max_abs() == 0.0);
    for (const auto& c : traj.conserved) {
      CHECK(c.mass == 0.0);
      CHECK(c.energy == 0.0);
      CHECK(c.variance == 0.0);
    }
  }
}

TEST_CASE("free Gaussian lens matches the exact solution") {
  const double b = 0.5, t = 0.4;
  const auto traj = evolve(lens(kLine, b), kFree, config(kLine, 1e-3, t, 400));
  const auto& f = traj.snapshots.back();
  double err = 0.0;
  for (std::size_t k = 0; k < kLine.size(); ++k)
    err = std::max(err, std::abs(f.values[k] - free_gaussian(kLine.node(k), t, b, 1)));
  CHECK(err < 1e-12);

  const auto ball = RadialGrid::radial(40.0, 4096);
  const auto traj3 = evolve(lens(ball, b), kFree, config(ball, 2.5e-4, t, 1600));
  const auto& g = traj3.snapshots.back();
  double err3 = 0.0;
  for (std::size_t k = 0; k < ball.size(); ++k)
    err3 = std::max(err3, std::abs(g.values[k] - free_gaussian(ball.node(k), t, b, 3)));
  CHECK(err3 < 1e-3);
}

namespace {

double worst_virial_error(const RadialGrid& grid, double dt, int stride) {
  const auto traj = evolve(lens(grid), kFree, config(grid, dt, 0.5, stride));
  const double delta = dt * stride;
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < traj.size(); ++s) {
    const double second =
        (traj.conserved[s + 1].variance - 2.0 * traj.conserved[s].variance + traj.conserved[s - 1].variance) /
        (delta * delta);
    const double rhs = 8.0 * traj.conserved[s].gradient_sq;
    worst = std::max(worst, std::abs(second - rhs) / rhs);
  }
  return worst;
}

}  // namespace

TEST_CASE("free virial identity: variance'' = 8 int |grad psi|^2") {
  CHECK(worst_virial_error(kLine, 1e-3, 50) <= 1e-6);
  // Second-order differences in 3D: the defect is O(h^2 + dt^2).
  const double coarse = worst_virial_error(RadialGrid::radial(40.0, 4096), 2.5e-4, 200);
  const double fine = worst_virial_error(RadialGrid::radial(40.0, 8191), 6.25e-5, 800);
  CHECK(coarse <= 2e-4);
  CHECK(coarse / fine >= 3.5);
}

TEST_CASE("dilation identity on a focusing run") {
  const auto init = make_initial_condition(Recipe::lens_soliton,
                                           {{"energy", 1.0}, {"amplitude", 0.05}, {"width", 1.0}, {"b", 0.2}}, kLine);
  const auto traj = evolve(init, kCubic, config(kLine, 1e-3, 2.0, 10));
  const double delta = 0.01;
  for (std::size_t s = 1; s + 1 < traj.size(); s += 20) {
    const double lhs = (traj.conserved[s + 1].variance - traj.conserved[s - 1].variance) / (2.0 * delta);
    const double rhs = 4.0 * traj.conserved[s].dilation;
    CHECK(std::abs(lhs - rhs) <= 1e-4 * std::abs(rhs));
  }
}

TEST_CASE("lens data contracts while the lens phase persists") {
  // Free lens with b = 0.5, w = 1 focuses at t = b / (4 (1/(4 w^4) + b^2)) = 0.25.
  const auto traj = evolve(lens(kLine), kFree, config(kLine, 1e-3, 0.25, 25));
  for (std::size_t s = 1; s < traj.size(); ++s)
    CHECK(traj.conserved[s].variance <= traj.conserved[s - 1].variance + 1e-8 * traj.conserved[0].variance);
}

TEST_CASE("Crank-Nicolson conserves mass and energy") {
  // The 3D cubic ground state is linearly unstable; grid-level mismatch seeds
  // the growing mode, so soliton runs are kept short.
  for (const auto& [init, t_final] : {std::pair{soliton(kBall), 0.5}, std::pair{lens(kBall), 2.0}}) {
    const auto traj = evolve(init, kCubic, config(kBall, 5e-4, t_final, 100));
    CHECK(traj.warnings.size() == 1);
    const auto& c0 = traj.conserved.front();
    for (std::size_t s = 1; s < traj.size(); ++s) {
      const double t = traj.time(s);
      CHECK(traj.mass_drift[s] <= 1e-8 * t);
      CHECK(std::abs(traj.conserved[s].energy - c0.energy) <= 1e-6 * t * std::abs(c0.energy));
    }
  }
}

TEST_CASE("radial flux ledger balances ball masses exactly") {
  const auto ball = RadialGrid::radial(40.0, 4096);
  const auto traj = evolve(lens(ball), kCubic, config(ball, 5e-4, 1.0, 100));
  REQUIRE(traj.interface_flux.size() == traj.size());
  const double h = ball.spacing();
  const double m0 = traj.conserved.front().mass;
  const auto ball_masses = [&](const WaveField& f) {
    std::vector<double> m(ball.size() - 1);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < ball.size(); ++k) {
      acc += 4.0 * std::numbers::pi * h * std::norm(ball.node(k) * f.values[k]);
      m[k] = acc;
    }
    return m;
  };
  double worst = 0.0;
  for (std::size_t s = 1; s < traj.size(); ++s) {
    const auto a = ball_masses(traj.snapshots[s - 1]);
    const auto b = ball_masses(traj.snapshots[s]);
    for (std::size_t k = 0; k < a.size(); k += 37)
      worst = std::max(worst, std::abs(b[k] - a[k] + 2.0 * traj.interface_flux[s][k]));
  }
  CHECK(worst <= 1e-12 * m0);
  for (double v : traj.interface_flux.front()) CHECK(v == 0.0);
}

TEST_CASE("step_once: consistency and gauge equivariance") {
  for (const auto& grid : {kLine, kBall}) {
    CAPTURE(grid.dimension());
    const auto psi = lens(grid);
    const auto m = default_method(grid);
    const double d1 = l2_diff(step_once(psi, kCubic, 1e-3, m), psi);
    const double d2 = l2_diff(step_once(psi, kCubic, 5e-4, m), psi);
    CHECK(d1 > 0.0);
    CHECK(d2 / d1 == doctest::Approx(0.5).epsilon(0.05));

    const cplx phase = std::exp(cplx(0.0, 0.7));
    auto rotated = psi;
    for (auto& v : rotated.values) v *= phase;
    const auto a = step_once(rotated, kCubic, 1e-3, m);
    auto b = step_once(psi, kCubic, 1e-3, m);
    for (auto& v : b.values) v *= phase;
    CHECK(l2_diff(a, b) <= 1e-13 * l2(psi));
  }
}

TEST_CASE("step_once is second order") {
  for (const auto& grid : {kLine, kBall}) {
    CAPTURE(grid.dimension());
    const auto psi = soliton(grid);
    const auto coarse = repeat_step(psi, kCubic, 0.04, 25);
    const auto mid = repeat_step(psi, kCubic, 0.02, 50);
    const auto fine = repeat_step(psi, kCubic, 0.01, 100);
    const double ratio = l2_diff(coarse, mid) / l2_diff(mid, fine);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
  }
}

TEST_CASE("time reversal: forward from conj(psi) is conj of backward") {
  for (const auto& grid : {kLine, kBall}) {
    CAPTURE(grid.dimension());
    const auto psi = lens(grid);
    auto conj_psi = psi;
    for (auto& v : conj_psi.values) v = std::conj(v);
    const auto fwd = repeat_step(conj_psi, kCubic, 1e-3, 100);
    auto bwd = repeat_step(psi, kCubic, -1e-3, 100);
    for (auto& v : bwd.values) v = std::conj(v);
    CHECK(l2_diff(fwd, bwd) <= 1e-11 * l2(psi));
  }
}

TEST_CASE("evolve and step_once are deterministic") {
  for (const auto& grid : {kLine, kBall}) {
    const auto psi = lens(grid);
    const auto a = evolve(psi, kCubic, config(grid, 1e-3, 0.05, 10));
    const auto b = evolve(psi, kCubic, config(grid, 1e-3, 0.05, 10));
    for (std::size_t s = 0; s < a.size(); ++s)
      CHECK(std::memcmp(a.snapshots[s].values.data(), b.snapshots[s].values.data(),
                        a.snapshots[s].size() * sizeof(cplx)) == 0);
    const auto m = default_method(grid);
    const auto x = step_once(psi, kCubic, 1e-3, m);
    const auto y = step_once(psi, kCubic, 1e-3, m);
    CHECK(std::memcmp(x.values.data(), y.values.data(), x.size() * sizeof(cplx)) == 0);
  }
}

TEST_CASE("sponge absorbs outgoing mass") {
  const auto grid = RadialGrid::line(8.0 * std::numbers::pi, 1024);
  auto cfg = config(grid, 1e-3, 8.0, 1000);
  cfg.sponge_width = 5.0;
  cfg.sponge_strength = 2.0;
  const auto init = make_initial_condition(Recipe::gaussian_lens, {{"amplitude", 1.0}, {"width", 0.5}, {"b", 0.0}}, grid);
  const auto traj = evolve(init, kFree, cfg);
  CHECK(traj.conserved.back().mass < 0.8 * traj.conserved.front().mass);
}

TEST_CASE("solver rejects bad settings") {
  const auto psi = lens(kLine);
  auto cfg = config(kLine, 1e-3, 1.0, 3);
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  cfg = config(kLine, 1e-3, 1.0, 1);
  cfg.method = Method::crank_nicolson_radial;
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  cfg = config(kLine, 1e-3, 1.0, 1);
  cfg.picard_tol = 1e-3;
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  cfg = config(kLine, 1e-3, 1.0, 1);
  cfg.picard_max_iter = 2;
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  cfg = config(kLine, 0.0, 1.0, 1);
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  cfg = config(kLine, 0.3, 1.0, 1);
  CHECK_THROWS_AS(evolve(psi, kCubic, cfg), InvalidArgument);
  CHECK_THROWS_AS(step_once(psi, kCubic, 1e-3, Method::crank_nicolson_radial), InvalidArgument);
  CHECK_THROWS_AS(step_once(psi, kCubic, 0.0, Method::split_step_fourier), InvalidArgument);
  CHECK(parse_method("crank_nicolson_radial") == Method::crank_nicolson_radial);
  CHECK_THROWS_AS(parse_method("rk4"), InvalidArgument);
}

TEST_CASE("stalled Picard iteration aborts at the first step") {
  const auto psi = make_initial_condition(Recipe::gaussian_lens, {{"amplitude", 100.0}, {"width", 1.0}, {"b", 0.0}}, kBall);
  auto cfg = config(kBall, 1e-2, 1.0, 1);
  cfg.picard_max_iter = 5;
  try {
    evolve(psi, kCubic, cfg);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.step() == 1);
    CHECK(std::string(e.what()).find("step 1") != std::string::npos);
  }
}
