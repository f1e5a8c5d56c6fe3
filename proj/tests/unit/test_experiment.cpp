#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "solitonscope/error.hpp"
#include "solitonscope/experiment.hpp"

using namespace solitonscope;
namespace fs = std::filesystem;

namespace {

const Scenario kAll[] = {Scenario::soliton_regression, Scenario::incoming_lens, Scenario::flux_classifier,
                         Scenario::phase_slope_study, Scenario::identity_suite};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "solitonscope_test" / name;
  fs::remove_all(dir);
  return dir;
}

FluxSeries series_of(const std::vector<double>& flux, double dt = 1.0) {
  FluxSeries s;
  s.radii = {1.0};
  for (std::size_t i = 0; i < flux.size(); ++i) {
    s.times.push_back(static_cast<double>(i) * dt);
    s.flux.push_back({flux[i]});
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

// Short exact-soliton run; every pipeline stage has data.
ExperimentConfig small_soliton(const fs::path& out) {
  auto c = default_config(Scenario::soliton_regression);
  c.num_points = 1024;
  c.solver.t_final = 2.0;
  c.solver.output_stride = 50;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("flux classifier patterns") {
  CHECK(classify_flux(series_of({0, 0, 0}), 0.0) == FluxVerdict::always_incoming);
  CHECK(classify_flux(series_of({-1, -2, -1}), 0.0) == FluxVerdict::always_incoming);
  CHECK(classify_flux(series_of({-1, -2, 1, 2}), 0.0) == FluxVerdict::incoming_then_outgoing);
  CHECK(classify_flux(series_of({1, 2, 1}), 0.0) == FluxVerdict::incoming_then_outgoing);
  CHECK(classify_flux(series_of({-1, 2, -3, 4}), 0.0) == FluxVerdict::mixed);
  CHECK(classify_flux(series_of({1, -2, -2}), 0.0) == FluxVerdict::mixed);

  // A brief outgoing blip inside an incoming phase is an L^1-small excursion.
  const auto blip = series_of({-1, -1, 1e-3, -1, -1});
  CHECK(classify_flux(blip, 0.0) == FluxVerdict::mixed);
  CHECK(classify_flux(blip, 1e-2) == FluxVerdict::always_incoming);
  // Same for an incoming wiggle after the switch.
  const auto wiggle = series_of({-1, -1, 1, 1, -1e-3, 1});
  CHECK(classify_flux(wiggle, 0.0) == FluxVerdict::mixed);
  CHECK(classify_flux(wiggle, 1e-2) == FluxVerdict::incoming_then_outgoing);
  // A tiny series of either sign stays always_incoming.
  CHECK(classify_flux(series_of({-1e-9, 1e-9, -1e-9}), 1e-3) == FluxVerdict::always_incoming);

  // Aggregation over radii.
  FluxSeries two = series_of({-1, -1, 1});
  two.radii.push_back(2.0);
  for (auto& row : two.flux) row.push_back(-1.0);
  CHECK(classify_flux_at(two, 1, 0.0) == FluxVerdict::always_incoming);
  CHECK(classify_flux(two, 0.0) == FluxVerdict::incoming_then_outgoing);
}

TEST_CASE("flux classifier tolerance is monotone") {
  std::mt19937_64 g(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> f(40);
    for (auto& v : f) v = n(g) - 0.8;
    const auto s = series_of(f, 0.1);
    const double tols[] = {0.0, 0.01, 0.05, 0.1, 0.3, 1.0, 10.0};
    bool incoming = false;
    for (double tol : tols) {
      const auto v = classify_flux(s, tol);
      if (incoming) CHECK(v == FluxVerdict::always_incoming);
      incoming = incoming || v == FluxVerdict::always_incoming;
    }
    // Sign-definite data is always_incoming with no budget at all.
    for (auto& v : f) v = -std::abs(v);
    CHECK(classify_flux(series_of(f, 0.1), 0.0) == FluxVerdict::always_incoming);
  }
}

TEST_CASE("stationary soliton flux is always incoming") {
  const auto grid = RadialGrid::line(20.0 * std::numbers::pi, 2048);
  auto c = default_config(Scenario::soliton_regression);
  SolverConfig cfg = c.solver;
  cfg.t_final = 5.0;
  cfg.output_stride = 1;
  cfg.dt = 0.1;
  const auto traj =
      standing_wave_trajectory(make_initial_condition(Recipe::exact_soliton, {{"energy", 1.0}}, grid), 1.0,
                               NonlinearitySpec::cubic_focusing(), cfg);
  // The closed-form flux is rounding noise of both signs; any budget above
  // it absorbs the noise.
  const auto series = flux_series(traj, {1.0, 2.0, 5.0});
  CHECK(classify_flux(series, 1e-3 * series.initial_mass) == FluxVerdict::always_incoming);
  CHECK(classify_flux(series, 1e-12) == FluxVerdict::always_incoming);
}

TEST_CASE("scenario defaults validate and round-trip") {
  for (Scenario s : kAll) {
    const auto c = default_config(s);
    CHECK_NOTHROW(validate(c, false));
    const auto text = to_ini(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(to_ini(back) == text);
  }
}

TEST_CASE("shipped configs equal the scenario defaults") {
  for (Scenario s : kAll) {
    const auto path = std::filesystem::path(SOLITONSCOPE_CONFIG_DIR) / (std::string(scenario_name(s)) + ".ini");
    INFO(path.string());
    CHECK(load_config(path) == default_config(s));
  }
}

TEST_CASE("config overrides and round trip of edited values") {
  auto c = default_config(Scenario::phase_slope_study);
  c.seed = 12345;
  c.solver.dt = 1.0 / 3.0 * 1e-2;
  c.radii = {0.1 + 0.2, std::numbers::pi};
  c.classifier_radii = {std::numbers::pi};
  c.interval = {-1.0 / 3.0, 2.0 / 7.0};
  c.thresholds = Thresholds{};
  c.thresholds.identity = 1e-7;
  c.expected_verdict = "mixed";
  c.stage_until = Stage::phase;
  CHECK(parse_config(to_ini(c)) == c);

  const auto d = parse_config(
      "[run]\nscenario = identity_suite\nseed = 9\n[grid]\nnum_points = 1024\n"
      "[thresholds]\nflux_balance = 1e-3\n");
  CHECK(d.seed == 9);
  CHECK(d.num_points == 1024);
  CHECK(d.nl.is_free());
  CHECK(d.thresholds.flux_balance == 1e-3);
  // Listing thresholds replaces the scenario's set.
  CHECK_FALSE(d.thresholds.mass_drift.has_value());
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[grid]\nnum_points = 64\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = nope\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = incoming_lens\n[grid]\nnum_pts = 3\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = incoming_lens\n[extras]\nx = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = incoming_lens\n[solver]\ndt = fast\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = incoming_lens\n[thresholds]\nbogus = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[run]\nscenario = incoming_lens\n[diagnostics]\nexpected_verdict = x\n"),
                  InvalidArgument);

  auto c = default_config(Scenario::soliton_regression);
  c.num_points = 0;
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::soliton_regression);
  c.radii.push_back(1000.0);
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::incoming_lens);
  c.interval = {-1.0, 1.0};
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::incoming_lens);
  c.solver.method = Method::split_step_fourier;
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::incoming_lens);
  c.classifier_radii = {3.0};
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::identity_suite);
  c.recipe_params.erase("spread");
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);
  c = default_config(Scenario::soliton_regression);
  c.recipe_params["width"] = 1.0;
  CHECK_THROWS_AS(validate(c, false), InvalidArgument);

  c = default_config(Scenario::soliton_regression);
  const auto blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file";
  c.output_dir = blocker / "run";
  CHECK_THROWS_AS(validate(c, true), InvalidArgument);
  CHECK_THROWS_AS(run(c), InvalidArgument);
  CHECK_FALSE(fs::exists(c.output_dir));
}

TEST_CASE("output directory resolution") {
  auto c = default_config(Scenario::identity_suite);
  c.output_dir = "configured";
  ::unsetenv("OUTPUT_DIR");
  CHECK(resolve_output_dir(c, "") == fs::path("configured"));
  ::setenv("OUTPUT_DIR", "/tmp/base", 1);
  CHECK(resolve_output_dir(c, "") == fs::path("/tmp/base/identity_suite"));
  CHECK(resolve_output_dir(c, "cli") == fs::path("cli"));
  ::unsetenv("OUTPUT_DIR");
}

TEST_CASE("random smooth data is reproducible from the seed") {
  auto c = default_config(Scenario::identity_suite);
  const auto a = initial_field(c);
  const auto b = initial_field(c);
  CHECK(a.values == b.values);
  c.seed = 2;
  CHECK(initial_field(c).values != a.values);
  CHECK(a.max_abs() > 0.1);

  auto r = default_config(Scenario::identity_suite);
  r.dimension = 3;
  r.extent = 20.0;
  r.num_points = 1025;
  r.solver.method = Method::crank_nicolson_radial;
  r.interval = {0.0, 1.0};
  const auto radial = initial_field(r);
  CHECK(radial.values.back() == cplx(0.0));
}

TEST_CASE("csv tables round-trip exactly") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Table t({"a", "b"});
  for (int i = 0; i < 200; ++i) t.add({u(g) * std::pow(10.0, i % 40 - 20), u(g)});
  t.add({0.0, -0.0});
  const auto dir = scratch("csv");
  fs::create_directories(dir);
  write_csv(t, dir / "t.csv");
  CHECK(read_csv(dir / "t.csv") == t);
  CHECK_THROWS_AS(t.add({1.0}), InvalidArgument);
  CHECK_THROWS_AS(t.column("c"), InvalidArgument);

  std::ofstream(dir / "bad.csv") << "a,b\n1,2\n3\n";
  try {
    read_csv(dir / "bad.csv");
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), InvalidArgument);
}

TEST_CASE("pipeline artifacts, report regeneration and determinism") {
  const auto dir = scratch("pipeline");
  const auto c = small_soliton(dir / "a");
  const auto report = run(c);
  CHECK(report.complete);
  CHECK(report.passed());
  for (const char* f : {"MANIFEST", "config.ini", "conserved.csv", "iwc.csv", "splitting.csv", "flux.csv", "phase.csv",
                        "distance.csv", "velocity.csv", "identities.csv", "metrics.json", "report.json"})
    CHECK_MESSAGE(fs::exists(c.output_dir / f), f);
  CHECK(slurp(c.output_dir / "MANIFEST").rfind("status complete\n", 0) == 0);
  CHECK(load_config(c.output_dir / "config.ini") == c);

  const auto again = report_from_dir(c.output_dir);
  CHECK(again.to_json() == report.to_json());
  CHECK(nlohmann::json::parse(slurp(c.output_dir / "report.json")) == report.to_json());

  auto c2 = c;
  c2.output_dir = dir / "b";
  run(c2);
  for (const auto& e : fs::directory_iterator(c.output_dir))
    if (e.path().extension() == ".csv") CHECK_MESSAGE(slurp(e.path()) == slurp(c2.output_dir / e.path().filename()), e.path());

  // Tightening a threshold flips the verdict without recomputation.
  auto strict = c;
  strict.thresholds.mass_drift = 0.0;
  strict.thresholds.ehat_reference = 1e-12;
  const auto re = summarize(strict, load_artifacts(c.output_dir));
  CHECK_FALSE(re.passed());
}

TEST_CASE("stage_until skips later checks") {
  auto c = small_soliton(scratch("until"));
  c.stage_until = Stage::flux;
  RunArtifacts art;
  const auto r = run(c, art);
  CHECK(r.passed());
  CHECK(art.phase.empty());
  for (const auto& ck : r.checks)
    if (ck.name == "reconstruction" || ck.name == "ehat_efit") CHECK(ck.skipped);
  CHECK(r.summary["stages"]["phase"] == "skipped: stage_until");
}

TEST_CASE("stage failures keep partial artifacts") {
  // Output spacing of 3.1 time units aliases the soliton phase e^{i t}.
  auto c = small_soliton(scratch("fail"));
  c.solver.t_final = 6.2;
  c.solver.output_stride = 3100;
  try {
    run(c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::phase);
  }
  CHECK(fs::exists(c.output_dir / "flux.csv"));
  const auto manifest = slurp(c.output_dir / "MANIFEST");
  CHECK(manifest.rfind("status incomplete\n", 0) == 0);
  CHECK(manifest.find("stage phase failed") != std::string::npos);
  const auto r = report_from_dir(c.output_dir);
  CHECK_FALSE(r.complete);
  CHECK(r.failed_stage == "phase");
  CHECK_FALSE(r.passed());
}

TEST_CASE("identity suite on free random data") {
  auto c = default_config(Scenario::identity_suite);
  c.output_dir = scratch("identity");
  const auto r = run(c);
  CHECK(r.passed());
  CHECK(r.summary["stages"]["phase"] == "skipped: nonlinearity is not focusing");
  for (const auto& ck : r.checks) CHECK_FALSE(ck.skipped);
}

TEST_CASE("good box missing is a failure when soliton checks are declared") {
  auto c = small_soliton(scratch("nobox"));
  c.delta = 10.0;
  RunArtifacts art;
  const auto r = run(c, art);
  CHECK(r.summary["stages"]["phase"] == "skipped: no good box");
  bool found = false;
  for (const auto& ck : r.checks)
    if (ck.name == "reconstruction") {
      found = true;
      CHECK_FALSE(ck.passed);
      CHECK_FALSE(ck.skipped);
    }
  CHECK(found);
  CHECK_FALSE(r.passed());
}
