#include "solitonscope/experiment.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "solitonscope/error.hpp"
#include "solitonscope/phase_lift.hpp"
#include "solitonscope/soliton_profile.hpp"

namespace solitonscope {

namespace {

using json = nlohmann::json;

constexpr const char* kNoBox = "skipped: no good box";
constexpr const char* kNotRequested = "skipped: stage_until";
constexpr const char* kNoSoliton = "skipped: nonlinearity is not focusing";
constexpr std::uint64_t kBatteryStream = 0x9e3779b97f4a7c15ULL;

const Stage kStages[] = {Stage::evolve, Stage::hydro, Stage::flux, Stage::phase, Stage::profile};

// Trapezoid weights of a time grid.
std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t s = 0; s + 1 < t.size(); ++s) {
    const double half = 0.5 * (t[s + 1] - t[s]);
    w[s] += half;
    w[s + 1] += half;
  }
  return w;
}

struct Run {
  int sign;
  double mass;
};

void merge(std::vector<Run>& runs) {
  std::vector<Run> out;
  for (const auto& r : runs) {
    if (!out.empty() && out.back().sign == r.sign) {
      out.back().mass += r.mass;
    } else {
      out.push_back(r);
    }
  }
  runs = std::move(out);
}

void absorb(std::vector<Run>& runs, int sign, double tol) {
  // A lone run has no neighbour to be absorbed into.
  if (runs.size() < 2) return;
  for (auto& r : runs)
    if (r.sign == sign && r.mass <= tol) r.sign = -sign;
  merge(runs);
}

FluxVerdict aggregate(const std::vector<FluxVerdict>& v) {
  if (std::all_of(v.begin(), v.end(), [](FluxVerdict x) { return x == FluxVerdict::always_incoming; }))
    return FluxVerdict::always_incoming;
  if (std::any_of(v.begin(), v.end(), [](FluxVerdict x) { return x == FluxVerdict::mixed; })) return FluxVerdict::mixed;
  return FluxVerdict::incoming_then_outgoing;
}

double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1.0p-53;
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

// Finite stand-in for a ratio whose denominator vanished.
double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::max() : 0.0;
}

std::string status_of(const RunArtifacts& a, Stage s) {
  const auto& st = a.metrics.value("stages", json::object());
  const auto it = st.find(std::string(stage_name(s)));
  return it == st.end() ? std::string(kNotRequested) : it->get<std::string>();
}

FluxSeries series_from_table(const ExperimentConfig& c, const RunArtifacts& a) {
  FluxSeries fs;
  fs.radii = c.radii;
  fs.initial_mass = a.metrics.value("initial_mass", 0.0);
  const auto t = a.flux.values("t");
  const auto f = a.flux.values("flux");
  const auto cum = a.flux.values("cumulative");
  const auto m = a.flux.values("ball_mass");
  const std::size_t nr = c.radii.size();
  if (t.size() % nr != 0) throw InvalidArgument("flux table does not match the configured radii");
  for (std::size_t row = 0; row < t.size(); row += nr) {
    fs.times.push_back(t[row]);
    fs.flux.emplace_back(f.begin() + row, f.begin() + row + nr);
    fs.cumulative.emplace_back(cum.begin() + row, cum.begin() + row + nr);
    fs.ball_mass.emplace_back(m.begin() + row, m.begin() + row + nr);
  }
  return fs;
}

json config_echo(const ExperimentConfig& c) {
  boost::property_tree::ptree tree;
  std::istringstream in(to_ini(c));
  boost::property_tree::ini_parser::read_ini(in, tree);
  json out = json::object();
  for (const auto& [section, body] : tree)
    for (const auto& [key, value] : body) out[section][key] = value.data();
  return out;
}

// Phase stage on a focusing run; fills art.phase, identities, velocity.
void phase_stage(const ExperimentConfig& c, const Trajectory& traj, RunArtifacts& art) {
  json& st = art.metrics["stages"];
  const double delta = c.delta > 0.0 ? c.delta : default_delta(traj, c.interval);
  const double mid = 0.5 * (c.interval.lo + c.interval.hi);
  const auto boxes = find_good_boxes(traj, delta, c.box_min_width, c.box_t_start);
  const auto box = std::find_if(boxes.begin(), boxes.end(), [&](const GoodBox& b) { return b.interval.contains(mid); });
  art.metrics["phase"]["delta"] = delta;
  if (box == boxes.end()) {
    st["phase"] = kNoBox;
    return;
  }
  const auto sheet = lift_phase(traj, *box);
  const auto plaq = check_plaquettes(traj, sheet);
  const auto res = polar_residuals(sheet, traj.nl);
  const auto slope = phase_slope(sheet);

  json& p = art.metrics["phase"];
  p["box_lo"] = box->interval.lo;
  p["box_hi"] = box->interval.hi;
  p["t_start"] = box->t_start;
  p["t_end"] = box->t_end;
  p["ref_r"] = box->ref_r;
  p["reconstruction"] = reconstruction_error(sheet, traj);
  p["max_winding"] = plaq.max_winding;
  p["nonzero_plaquettes"] = plaq.nonzero;
  p["path_difference"] = plaq.path_difference;
  p["res_a"] = res.res_a;
  p["res_b"] = res.res_b;
  p["e_hat"] = slope.e_hat;
  p["r_spread"] = slope.r_spread;
  p["fit_residual"] = slope.fit_residual;
  p["short_box"] = slope.short_box;
  p["non_converged"] = slope.non_converged;

  const std::size_t ref = box->ref_node - box->node_lo;
  art.phase = Table({"t", "theta_ref", "eta_ref"});
  for (std::size_t s = 0; s < sheet.times.size(); ++s)
    art.phase.add({sheet.times[s], sheet.theta[s][ref], sheet.eta[s][ref]});

  art.identities = Table({"center", "width", "lhs", "rhs", "phase_gradient"});
  const double h = traj.grid().spacing();
  const double half = 0.5 * box->interval.width();
  const double width = c.test_width * half;
  const double lo = box->interval.lo + width + 3.0 * h, hi = box->interval.hi - width - 3.0 * h;
  if (width > 2.0 * h && lo <= hi) {
    std::mt19937_64 g(c.seed ^ kBatteryStream);
    for (int i = 0; i < c.test_functions; ++i) {
      const double center = uniform(g, lo, hi);
      const auto id = theta_average_identity(sheet, traj.nl, box_bump(sheet, center, width));
      art.identities.add({center, width, id.lhs, id.rhs, id.phase_gradient});
    }
  }

  // Same floor as the good box.
  const auto vd = velocity_decay_on_interval(traj, c.interval, 0.5 * delta);
  art.velocity = Table({"t", "norm", "running_average"});
  for (std::size_t s = 0; s < vd.times.size(); ++s) art.velocity.add({vd.times[s], vd.norm[s], vd.running_average[s]});
  p["velocity_floor_violated"] = vd.floor_violated;
  p["velocity_min_eta"] = vd.min_eta;
  st["phase"] = "done";
}

void profile_stage(const ExperimentConfig& c, const Trajectory& traj, RunArtifacts& art) {
  const auto& g = traj.grid();
  const double t_q = traj.time(0) + 0.75 * (traj.time(traj.size() - 1) - traj.time(0));
  std::vector<double> ubar(g.size(), 0.0);
  std::size_t count = 0;
  for (const auto& f : traj.snapshots) {
    if (f.time < t_q) continue;
    for (std::size_t k = 0; k < g.size(); ++k) ubar[k] += std::abs(f.values[k]);
    ++count;
  }
  for (auto& v : ubar) v /= static_cast<double>(count);
  const auto fit = fit_profile(ubar, g, traj.nl, c.interval);
  const auto profile = solve_profile(fit.energy, traj.nl, g);
  art.distance = Table({"t", "distance"});
  std::vector<double> eta(g.size());
  for (const auto& f : traj.snapshots) {
    for (std::size_t k = 0; k < g.size(); ++k) eta[k] = std::abs(f.values[k]);
    art.distance.add({f.time, profile_distance(eta, profile, c.interval, DistanceNorm::l2)});
  }
  art.metrics["profile"]["e_fit"] = fit.energy;
  art.metrics["profile"]["fit_distance"] = fit.distance;
  art.metrics["stages"]["profile"] = "done";
}

void execute(const ExperimentConfig& c, RunArtifacts& art) {
  art = RunArtifacts{};
  json& st = art.metrics["stages"];
  for (Stage s : kStages) st[std::string(stage_name(s))] = kNotRequested;
  Stage current = Stage::evolve;
  try {
    const auto traj = evolve(initial_field(c), c.nl, c.solver);
    art.conserved = Table({"t", "mass", "energy", "variance", "dilation", "h1_norm", "gradient_sq", "mass_drift"});
    for (std::size_t s = 0; s < traj.size(); ++s) {
      const auto& q = traj.conserved[s];
      art.conserved.add(
          {traj.time(s), q.mass, q.energy, q.variance, q.dilation, q.h1_norm, q.gradient_sq, traj.mass_drift[s]});
    }
    art.metrics["initial_mass"] = traj.conserved.front().mass;
    art.metrics["solver_warnings"] = traj.warnings;
    st["evolve"] = "done";

    if (c.stage_until >= Stage::hydro) {
      current = Stage::hydro;
      art.iwc = Table({"t", "worst", "satisfied"});
      art.splitting = Table({"t", "grad_psi_sq", "grad_eta_sq", "eta_v_sq", "relative_error", "nodeless"});
      for (const auto& f : traj.snapshots) {
        const auto iwc = iwc_indicator(hydro_frame(f));
        art.iwc.add({f.time, iwc.worst, iwc.satisfied ? 1.0 : 0.0});
        const auto ks = kinetic_splitting(f);
        art.splitting.add(
            {f.time, ks.grad_psi_sq, ks.grad_eta_sq, ks.eta_v_sq, ks.relative_error(), is_nodeless(f) ? 1.0 : 0.0});
      }
      st["hydro"] = "done";
    }

    if (c.stage_until >= Stage::flux) {
      current = Stage::flux;
      const auto fs = flux_series(traj, c.radii);
      art.flux = Table({"t", "radius", "flux", "cumulative", "ball_mass"});
      for (std::size_t s = 0; s < fs.times.size(); ++s)
        for (std::size_t i = 0; i < fs.radii.size(); ++i)
          art.flux.add({fs.times[s], fs.radii[i], fs.flux[s][i], fs.cumulative[s][i], fs.ball_mass[s][i]});
      const auto lim = flux_limit_checks(fs);
      art.metrics["flux_limits"] = {{"inner_sup", lim.inner_sup}, {"outer_sup", lim.outer_sup}, {"tolerance", lim.tolerance}};
      art.metrics["flux_warnings"] = fs.warnings;
      st["flux"] = "done";
    }

    if (c.stage_until >= Stage::phase) {
      current = Stage::phase;
      if (!c.nl.is_focusing()) {
        st["phase"] = kNoSoliton;
      } else {
        phase_stage(c, traj, art);
      }
    }

    if (c.stage_until >= Stage::profile) {
      current = Stage::profile;
      if (!c.nl.is_focusing()) {
        st["profile"] = kNoSoliton;
      } else {
        profile_stage(c, traj, art);
      }
    }
  } catch (const std::exception& e) {
    st[std::string(stage_name(current))] = std::string("failed: ") + e.what();
    throw StageError(current, e.what());
  }
}

std::string manifest_text(const RunArtifacts& art, const RunReport& report) {
  std::ostringstream o;
  o << "status " << (report.complete ? "complete" : "incomplete") << "\n";
  o << "scenario " << scenario_name(report.config.scenario) << "\n";
  for (Stage s : kStages) o << "stage " << stage_name(s) << " " << status_of(art, s) << "\n";
  o << "file config.ini\n";
  for (const auto& [name, table] : art.tables()) o << "file " << name << "\n";
  o << "file metrics.json\nfile report.json\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

}  // namespace

FluxVerdict parse_verdict(std::string_view name) {
  if (name == "always_incoming") return FluxVerdict::always_incoming;
  if (name == "incoming_then_outgoing") return FluxVerdict::incoming_then_outgoing;
  if (name == "mixed") return FluxVerdict::mixed;
  throw InvalidArgument("unknown flux verdict '" + std::string(name) + "'");
}

std::string_view verdict_name(FluxVerdict verdict) {
  switch (verdict) {
    case FluxVerdict::always_incoming: return "always_incoming";
    case FluxVerdict::incoming_then_outgoing: return "incoming_then_outgoing";
    case FluxVerdict::mixed: return "mixed";
  }
  return "?";
}

FluxVerdict classify_flux_at(const FluxSeries& series, std::size_t radius, double l1_tol) {
  const auto w = trapezoid_weights(series.times);
  std::vector<Run> runs;
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    const double f = series.flux[s][radius];
    runs.push_back({f > 0.0 ? 1 : -1, std::abs(f) * w[s]});
  }
  merge(runs);
  absorb(runs, 1, l1_tol);
  absorb(runs, -1, l1_tol);
  if (runs.empty() || (runs.size() == 1 && runs[0].sign < 0)) return FluxVerdict::always_incoming;
  if (runs.size() == 1 || (runs.size() == 2 && runs[0].sign < 0)) return FluxVerdict::incoming_then_outgoing;
  return FluxVerdict::mixed;
}

FluxVerdict classify_flux(const FluxSeries& series, double l1_tol) {
  std::vector<FluxVerdict> v;
  for (std::size_t i = 0; i < series.radii.size(); ++i) v.push_back(classify_flux_at(series, i, l1_tol));
  return aggregate(v);
}

std::vector<std::pair<std::string, const Table*>> RunArtifacts::tables() const {
  const std::pair<const char*, const Table*> all[] = {
      {"conserved.csv", &conserved}, {"iwc.csv", &iwc},           {"splitting.csv", &splitting},
      {"flux.csv", &flux},           {"phase.csv", &phase},       {"distance.csv", &distance},
      {"velocity.csv", &velocity},   {"identities.csv", &identities},
  };
  std::vector<std::pair<std::string, const Table*>> out;
  for (const auto& [name, t] : all)
    if (!t->columns.empty()) out.emplace_back(name, t);
  return out;
}

bool RunReport::passed() const {
  return complete && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || c.skipped; });
}

json RunReport::to_json() const {
  json j;
  j["config"] = config_echo(config);
  j["complete"] = complete;
  j["failed_stage"] = failed_stage;
  j["error"] = error;
  j["summary"] = summary;
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name},
                           {"value", c.value},
                           {"threshold", c.threshold},
                           {"relation", c.relation},
                           {"passed", c.passed},
                           {"skipped", c.skipped}});
  j["warnings"] = warnings;
  j["passed"] = passed();
  return j;
}

RunReport summarize(const ExperimentConfig& c, const RunArtifacts& a) {
  RunReport r;
  r.config = c;
  r.complete = true;
  for (Stage s : kStages) {
    const auto status = status_of(a, s);
    if (status.rfind("failed", 0) == 0) {
      r.complete = false;
      r.failed_stage = std::string(stage_name(s));
      r.error = status.substr(8);
    }
  }
  json& sum = r.summary;
  sum["stages"] = a.metrics.value("stages", json::object());
  for (const char* key : {"solver_warnings", "flux_warnings"})
    for (const auto& w : a.metrics.value(key, json::array())) r.warnings.push_back(w.get<std::string>());

  const auto& th = c.thresholds;
  // Adds a check; `available` is false when the stage that produces the
  // value did not run or failed.
  const auto add = [&](const std::string& name, Stage stage, bool available, double value, double threshold,
                       const std::string& rel) {
    Check ck{name, value, threshold, rel, false, false};
    const auto status = status_of(a, stage);
    if (!available) {
      // A stage that ran and found no box counts as a failure; one that was
      // not requested or does not apply is skipped.
      ck.skipped = status != kNoBox && status.rfind("failed", 0) != 0;
      ck.value = 0.0;
    } else if (rel == "<=") {
      ck.passed = value <= threshold;
    } else if (rel == ">=") {
      ck.passed = value >= threshold;
    } else {
      ck.passed = value == threshold;
    }
    r.checks.push_back(ck);
  };

  // Conservation.
  const bool have_conserved = !a.conserved.empty();
  double mass_drift = 0.0, energy_drift = 0.0;
  if (have_conserved) {
    mass_drift = max_of(a.conserved.values("mass_drift"));
    const auto e = a.conserved.values("energy");
    const double scale = std::abs(e.front()) > 0.0 ? std::abs(e.front()) : 1.0;
    for (double v : e) energy_drift = std::max(energy_drift, std::abs(v - e.front()) / scale);
    sum["conservation"] = {{"max_mass_drift", mass_drift},
                           {"max_energy_drift", energy_drift},
                           {"max_h1_norm", max_of(a.conserved.values("h1_norm"))}};
  }
  if (th.mass_drift) add("mass_drift", Stage::evolve, have_conserved, mass_drift, *th.mass_drift, "<=");
  if (th.energy_drift) add("energy_drift", Stage::evolve, have_conserved, energy_drift, *th.energy_drift, "<=");

  // IWC and kinetic splitting.
  std::size_t iwc_prefix = 0;
  const bool have_hydro = !a.iwc.empty();
  double split = 0.0;
  if (have_hydro) {
    const auto t = a.iwc.values("t"), worst = a.iwc.values("worst"), ok = a.iwc.values("satisfied");
    while (iwc_prefix < ok.size() && ok[iwc_prefix] == 1.0) ++iwc_prefix;
    json rows = json::array();
    for (std::size_t s = 0; s < t.size(); ++s) rows.push_back({{"t", t[s]}, {"worst", worst[s]}, {"satisfied", ok[s] == 1.0}});
    sum["iwc"] = {{"per_snapshot", rows}, {"holds_for_snapshots", iwc_prefix}};
    split = max_of(a.splitting.values("relative_error"));
    const auto nodeless = a.splitting.values("nodeless");
    sum["kinetic_splitting"] = {{"max_relative_error", split},
                                {"nodeless_snapshots", std::count(nodeless.begin(), nodeless.end(), 1.0)}};
  }
  if (th.kinetic_splitting) add("kinetic_splitting", Stage::hydro, have_hydro, split, *th.kinetic_splitting, "<=");

  // Flux.
  const bool have_flux = !a.flux.empty();
  if (have_flux) {
    const auto fs = series_from_table(c, a);
    const double m0 = fs.initial_mass;
    const double balance = safe_ratio(fs.balance_defect(), m0);
    const double tol = c.l1_tol * m0;
    std::vector<FluxVerdict> chosen;
    json per = json::array();
    const double t_tail = fs.times.front() + 0.75 * (fs.times.back() - fs.times.front());
    for (std::size_t i = 0; i < fs.radii.size(); ++i) {
      const auto v = classify_flux_at(fs, i, tol);
      const bool selected = c.classifier_radii.empty() ||
                            std::find(c.classifier_radii.begin(), c.classifier_radii.end(), fs.radii[i]) !=
                                c.classifier_radii.end();
      if (selected) chosen.push_back(v);
      double peak = 0.0, tail = 0.0;
      for (std::size_t s = 0; s < fs.times.size(); ++s) {
        peak = std::max(peak, std::abs(fs.flux[s][i]));
        if (fs.times[s] >= t_tail) tail = std::max(tail, std::abs(fs.flux[s][i]));
      }
      per.push_back({{"radius", fs.radii[i]},
                     {"verdict", verdict_name(v)},
                     {"final_cumulative", fs.cumulative.back()[i]},
                     {"tail_ratio", safe_ratio(tail, peak)}});
    }
    const auto verdict = aggregate(chosen);
    const bool bound = fs.within_incoming_bound(iwc_prefix);
    sum["flux"] = {{"balance_defect_relative", balance},
                   {"incoming_bound", bound},
                   {"iwc_snapshots_checked", iwc_prefix},
                   {"verdict", verdict_name(verdict)},
                   {"per_radius", per},
                   {"finite_horizon_surrogate", true},
                   {"limits", a.metrics.value("flux_limits", json::object())}};
    if (th.flux_balance) add("flux_balance", Stage::flux, true, balance, *th.flux_balance, "<=");
    if (th.incoming_bound) add("incoming_bound", Stage::flux, have_hydro, bound ? 1.0 : 0.0, 1.0, "==");
    if (!c.expected_verdict.empty())
      add("flux_verdict", Stage::flux, true, static_cast<double>(verdict),
          static_cast<double>(parse_verdict(c.expected_verdict)), "==");
  } else {
    if (th.flux_balance) add("flux_balance", Stage::flux, false, 0.0, *th.flux_balance, "<=");
    if (th.incoming_bound) add("incoming_bound", Stage::flux, false, 0.0, 1.0, "==");
    if (!c.expected_verdict.empty())
      add("flux_verdict", Stage::flux, false, 0.0, static_cast<double>(parse_verdict(c.expected_verdict)), "==");
  }

  // Phase.
  const json phase = a.metrics.value("phase", json::object());
  const bool have_phase = phase.contains("e_hat");
  if (have_phase) sum["phase"] = phase;
  const double e_hat = have_phase ? phase["e_hat"].get<double>() : 0.0;
  if (th.reconstruction)
    add("reconstruction", Stage::phase, have_phase, have_phase ? phase["reconstruction"].get<double>() : 0.0,
        *th.reconstruction, "<=");
  if (th.plaquette_winding)
    add("plaquette_winding", Stage::phase, have_phase,
        have_phase ? static_cast<double>(phase["max_winding"].get<long>()) : 0.0, *th.plaquette_winding, "<=");
  const double e_ref = c.reference_energy;
  if (th.ehat_reference)
    add("ehat_reference", Stage::phase, have_phase && e_ref > 0.0, std::abs(e_hat - e_ref) / std::max(e_ref, 1e-300),
        *th.ehat_reference, "<=");

  // Identities.
  const bool have_ids = !a.identities.empty();
  double id_worst = 0.0;
  if (have_ids) {
    const auto lhs = a.identities.values("lhs"), rhs = a.identities.values("rhs");
    for (std::size_t i = 0; i < lhs.size(); ++i)
      id_worst = std::max(id_worst, safe_ratio(std::abs(lhs[i] - rhs[i]), std::max(std::abs(lhs[i]), std::abs(rhs[i]))));
    sum["identities"] = {{"count", lhs.size()}, {"max_relative_defect", id_worst}};
  }
  if (th.identity) add("identity", Stage::phase, have_ids, id_worst, *th.identity, "<=");

  // Profile fit and distances.
  const json profile = a.metrics.value("profile", json::object());
  const bool have_fit = profile.contains("e_fit");
  const double e_fit = have_fit ? profile["e_fit"].get<double>() : 0.0;
  double decrease = 0.0;
  if (have_fit) {
    const auto d = a.distance.values("distance");
    const double dmax = max_of(d);
    decrease = safe_ratio(dmax, d.back());
    json p = profile;
    p["distance_max"] = dmax;
    p["distance_final"] = d.back();
    p["distance_decrease"] = decrease;
    p["distances"] = json::array();
    const auto t = a.distance.values("t");
    for (std::size_t s = 0; s < t.size(); ++s) p["distances"].push_back({{"t", t[s]}, {"distance", d[s]}});
    if (have_phase) p["ehat_efit_gap"] = std::abs(e_hat - e_fit) / e_fit;
    sum["profile"] = p;
  }
  if (th.efit_reference)
    add("efit_reference", Stage::profile, have_fit && e_ref > 0.0, std::abs(e_fit - e_ref) / std::max(e_ref, 1e-300),
        *th.efit_reference, "<=");
  if (th.ehat_efit)
    add("ehat_efit", Stage::profile, have_fit && have_phase, have_fit ? std::abs(e_hat - e_fit) / e_fit : 0.0,
        *th.ehat_efit, "<=");
  if (th.distance_decrease)
    add("distance_decrease", Stage::profile, have_fit, decrease, *th.distance_decrease, ">=");
  return r;
}

void write_artifacts(const RunArtifacts& art, const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "config.ini", to_ini(report.config));
  for (const auto& [name, table] : art.tables()) write_csv(*table, dir / name);
  write_text(dir / "metrics.json", art.metrics.dump(2) + "\n");
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  write_text(dir / "MANIFEST", manifest_text(art, report));
}

RunReport run(const ExperimentConfig& config, RunArtifacts& artifacts) {
  validate(config, false);
  execute(config, artifacts);
  return summarize(config, artifacts);
}

RunReport run(const ExperimentConfig& config) {
  validate(config, true);
  RunArtifacts art;
  try {
    execute(config, art);
  } catch (const StageError&) {
    write_artifacts(art, summarize(config, art), config.output_dir);
    throw;
  }
  auto report = summarize(config, art);
  write_artifacts(art, report, config.output_dir);
  return report;
}

RunArtifacts load_artifacts(const std::filesystem::path& run_dir) {
  if (!std::filesystem::exists(run_dir / "MANIFEST")) throw InvalidArgument("no MANIFEST in " + run_dir.string());
  RunArtifacts art;
  const std::pair<const char*, Table*> all[] = {
      {"conserved.csv", &art.conserved}, {"iwc.csv", &art.iwc},         {"splitting.csv", &art.splitting},
      {"flux.csv", &art.flux},           {"phase.csv", &art.phase},     {"distance.csv", &art.distance},
      {"velocity.csv", &art.velocity},   {"identities.csv", &art.identities},
  };
  std::ifstream manifest(run_dir / "MANIFEST");
  std::vector<std::string> listed;
  for (std::string line; std::getline(manifest, line);)
    if (line.rfind("file ", 0) == 0) listed.push_back(line.substr(5));
  for (const auto& [name, table] : all)
    if (std::find(listed.begin(), listed.end(), name) != listed.end()) *table = read_csv(run_dir / name);
  std::ifstream metrics(run_dir / "metrics.json");
  if (!metrics) throw InvalidArgument("missing file " + (run_dir / "metrics.json").string());
  try {
    art.metrics = json::parse(metrics);
  } catch (const json::exception& e) {
    throw InvalidArgument((run_dir / "metrics.json").string() + ": " + e.what());
  }
  return art;
}

RunReport report_from_dir(const std::filesystem::path& run_dir) {
  const auto config = load_config(run_dir / "config.ini");
  return summarize(config, load_artifacts(run_dir));
}

}  // namespace solitonscope
