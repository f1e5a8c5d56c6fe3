#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "solitonscope/error.hpp"
#include "solitonscope/experiment.hpp"

namespace solitonscope {

namespace {

constexpr std::string_view kRandomSmooth = "random_smooth";

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v))
    throw InvalidArgument("config: '" + key + "' is not a finite number: '" + text + "'");
  return v;
}

long parse_integer(const std::string& key, const std::string& text) {
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw InvalidArgument("config: '" + key + "' is not an integer: '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& key, std::string text) {
  for (auto& c : text)
    if (c == ',') c = ' ';
  std::vector<double> out;
  std::istringstream in(text);
  for (std::string item; in >> item;) out.push_back(parse_double(key, item));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::optional<double>& threshold_slot(Thresholds& t, const std::string& key) {
  static const std::map<std::string, std::optional<double> Thresholds::*> slots{
      {"mass_drift", &Thresholds::mass_drift},
      {"energy_drift", &Thresholds::energy_drift},
      {"kinetic_splitting", &Thresholds::kinetic_splitting},
      {"flux_balance", &Thresholds::flux_balance},
      {"reconstruction", &Thresholds::reconstruction},
      {"plaquette_winding", &Thresholds::plaquette_winding},
      {"ehat_reference", &Thresholds::ehat_reference},
      {"efit_reference", &Thresholds::efit_reference},
      {"ehat_efit", &Thresholds::ehat_efit},
      {"distance_decrease", &Thresholds::distance_decrease},
      {"identity", &Thresholds::identity},
  };
  const auto it = slots.find(key);
  if (it == slots.end()) throw InvalidArgument("config: unknown key [thresholds] " + key);
  return t.*(it->second);
}

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  using C = ExperimentConfig;
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"run",
       {
           {"scenario", [](C& c, const std::string& v) { c.scenario = parse_scenario(v); }},
           {"name", [](C& c, const std::string& v) { c.name = v; }},
           {"output_dir", [](C& c, const std::string& v) { c.output_dir = v; }},
           {"seed",
            [](C& c, const std::string& v) {
              const long s = parse_integer("seed", v);
              if (s < 0) throw InvalidArgument("config: seed must be >= 0");
              c.seed = static_cast<std::uint64_t>(s);
            }},
           {"stage_until", [](C& c, const std::string& v) { c.stage_until = parse_stage(v); }},
       }},
      {"grid",
       {
           {"dimension", [](C& c, const std::string& v) { c.dimension = static_cast<int>(parse_integer("dimension", v)); }},
           {"extent", [](C& c, const std::string& v) { c.extent = parse_double("extent", v); }},
           {"num_points",
            [](C& c, const std::string& v) {
              const long n = parse_integer("num_points", v);
              if (n < 0) throw InvalidArgument("config: num_points must be >= 0");
              c.num_points = static_cast<std::size_t>(n);
            }},
       }},
      {"physics",
       {
           {"power", [](C& c, const std::string& v) { c.nl.power = parse_double("power", v); }},
           {"coefficient", [](C& c, const std::string& v) { c.nl.coefficient = parse_double("coefficient", v); }},
       }},
      {"solver",
       {
           {"method", [](C& c, const std::string& v) { c.solver.method = parse_method(v); }},
           {"dt", [](C& c, const std::string& v) { c.solver.dt = parse_double("dt", v); }},
           {"t_final", [](C& c, const std::string& v) { c.solver.t_final = parse_double("t_final", v); }},
           {"output_stride",
            [](C& c, const std::string& v) { c.solver.output_stride = static_cast<int>(parse_integer("output_stride", v)); }},
           {"picard_tol", [](C& c, const std::string& v) { c.solver.picard_tol = parse_double("picard_tol", v); }},
           {"picard_max_iter",
            [](C& c, const std::string& v) {
              c.solver.picard_max_iter = static_cast<int>(parse_integer("picard_max_iter", v));
            }},
           {"sponge_width", [](C& c, const std::string& v) { c.solver.sponge_width = parse_double("sponge_width", v); }},
           {"sponge_strength",
            [](C& c, const std::string& v) { c.solver.sponge_strength = parse_double("sponge_strength", v); }},
       }},
      {"diagnostics",
       {
           {"radii", [](C& c, const std::string& v) { c.radii = parse_list("radii", v); }},
           {"classifier_radii", [](C& c, const std::string& v) { c.classifier_radii = parse_list("classifier_radii", v); }},
           {"interval_lo", [](C& c, const std::string& v) { c.interval.lo = parse_double("interval_lo", v); }},
           {"interval_hi", [](C& c, const std::string& v) { c.interval.hi = parse_double("interval_hi", v); }},
           {"delta", [](C& c, const std::string& v) { c.delta = parse_double("delta", v); }},
           {"box_min_width", [](C& c, const std::string& v) { c.box_min_width = parse_double("box_min_width", v); }},
           {"box_t_start", [](C& c, const std::string& v) { c.box_t_start = parse_double("box_t_start", v); }},
           {"test_functions",
            [](C& c, const std::string& v) { c.test_functions = static_cast<int>(parse_integer("test_functions", v)); }},
           {"test_width", [](C& c, const std::string& v) { c.test_width = parse_double("test_width", v); }},
           {"l1_tol", [](C& c, const std::string& v) { c.l1_tol = parse_double("l1_tol", v); }},
           {"reference_energy", [](C& c, const std::string& v) { c.reference_energy = parse_double("reference_energy", v); }},
           {"expected_verdict",
            [](C& c, const std::string& v) {
              if (!v.empty()) parse_verdict(v);
              c.expected_verdict = v;
            }},
       }},
  };
  return table;
}

double uniform(std::mt19937_64& g, double lo, double hi) {
  // 53 random bits; std::uniform_real_distribution is not specified
  // bit-for-bit across standard libraries.
  return lo + (hi - lo) * static_cast<double>(g() >> 11) * 0x1.0p-53;
}

WaveField random_smooth(const ExperimentConfig& c, const RadialGrid& grid) {
  const auto& p = c.recipe_params;
  const int count = static_cast<int>(p.at("count"));
  const double amp = p.at("amplitude"), width = p.at("width"), spread = p.at("spread"), k_max = p.at("k_max");
  std::mt19937_64 g(c.seed);
  std::vector<cplx> v(grid.size(), 0.0);
  for (int i = 0; i < count; ++i) {
    const double center = grid.is_line() ? uniform(g, -spread, spread) : 0.0;
    const double w = width * uniform(g, 0.5, 1.5);
    const double k = uniform(g, -k_max, k_max);
    const double phase = uniform(g, 0.0, 2.0 * std::numbers::pi);
    const double a = amp * uniform(g, 0.5, 1.0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double x = grid.node(j);
      const double d = x - center;
      // On the radial grid k acts as a lens strength, keeping the data smooth at r = 0.
      const double arg = grid.is_line() ? k * x + phase : -k * x * x + phase;
      v[j] += a * std::exp(-0.5 * d * d / (w * w)) * std::exp(cplx(0.0, arg));
    }
  }
  if (!grid.is_line()) v.back() = 0.0;
  return from_samples(grid, v);
}

void validate_random_smooth(const RecipeParams& p) {
  for (const auto& k : {"count", "amplitude", "width", "spread", "k_max"})
    if (!p.contains(k)) throw InvalidArgument(std::string("recipe random_smooth: missing parameter '") + k + "'");
  for (const auto& [k, v] : p) {
    if (k != "count" && k != "amplitude" && k != "width" && k != "spread" && k != "k_max")
      throw InvalidArgument("recipe random_smooth: unknown parameter '" + k + "'");
    if (v < 0.0) throw InvalidArgument("recipe random_smooth: '" + k + "' must be >= 0");
  }
  const double count = p.at("count");
  if (count < 1.0 || count != std::floor(count)) throw InvalidArgument("recipe random_smooth: count must be a positive integer");
  if (!(p.at("width") > 0.0)) throw InvalidArgument("recipe random_smooth: width must be positive");
}

}  // namespace

Scenario parse_scenario(std::string_view name) {
  if (name == "soliton_regression") return Scenario::soliton_regression;
  if (name == "incoming_lens") return Scenario::incoming_lens;
  if (name == "flux_classifier") return Scenario::flux_classifier;
  if (name == "phase_slope_study") return Scenario::phase_slope_study;
  if (name == "identity_suite") return Scenario::identity_suite;
  throw InvalidArgument("unknown scenario '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario scenario) {
  switch (scenario) {
    case Scenario::soliton_regression: return "soliton_regression";
    case Scenario::incoming_lens: return "incoming_lens";
    case Scenario::flux_classifier: return "flux_classifier";
    case Scenario::phase_slope_study: return "phase_slope_study";
    case Scenario::identity_suite: return "identity_suite";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  if (name == "evolve") return Stage::evolve;
  if (name == "hydro") return Stage::hydro;
  if (name == "flux") return Stage::flux;
  if (name == "phase") return Stage::phase;
  if (name == "profile") return Stage::profile;
  throw InvalidArgument("unknown stage '" + std::string(name) + "'");
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::evolve: return "evolve";
    case Stage::hydro: return "hydro";
    case Stage::flux: return "flux";
    case Stage::phase: return "phase";
    case Stage::profile: return "profile";
  }
  return "?";
}

RadialGrid ExperimentConfig::grid() const {
  if (dimension == 1) return RadialGrid::line(extent, num_points);
  if (dimension == 3) return RadialGrid::radial(extent, num_points);
  throw InvalidArgument("config: dimension must be 1 or 3");
}

ExperimentConfig default_config(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.name = std::string(scenario_name(scenario));
  c.output_dir = std::filesystem::path("runs") / c.name;

  // 1D split-step defaults.
  c.dimension = 1;
  c.extent = 20.0 * std::numbers::pi;
  c.num_points = 2048;
  c.solver.method = Method::split_step_fourier;
  c.solver.dt = 1e-3;
  c.interval = {-1.5, 1.5};
  c.radii = {2.0, 5.0, 10.0, 20.0};

  auto& t = c.thresholds;
  switch (scenario) {
    case Scenario::soliton_regression:
      c.solver.t_final = 50.0;
      c.solver.output_stride = 100;
      c.recipe = "exact_soliton";
      c.recipe_params = {{"energy", 1.0}};
      c.reference_energy = 1.0;
      c.expected_verdict = "always_incoming";
      t.mass_drift = 1e-10;
      t.energy_drift = 1e-8;
      t.kinetic_splitting = 1e-8;
      t.flux_balance = 1e-6;
      t.reconstruction = 1e-10;
      t.plaquette_winding = 0.0;
      t.ehat_reference = 1e-4;
      t.efit_reference = 1e-3;
      t.ehat_efit = 1e-3;
      t.identity = 1e-4;
      break;
    case Scenario::phase_slope_study:
      c.extent = 40.0 * std::numbers::pi;
      c.num_points = 4096;
      c.solver.t_final = 50.0;
      c.solver.output_stride = 100;
      c.recipe = "lens_soliton";
      c.recipe_params = {{"energy", 1.0}, {"amplitude", 0.05}, {"width", 1.0}, {"b", 0.02}};
      c.radii = {2.0, 5.0, 10.0, 20.0, 40.0};
      t.mass_drift = 1e-10;
      // The perturbation carries higher wavenumbers; Strang's O(dt^2)
      // energy error is 2e-7 here.
      t.energy_drift = 1e-6;
      t.kinetic_splitting = 1e-8;
      t.flux_balance = 1e-3;
      t.reconstruction = 1e-10;
      t.plaquette_winding = 0.0;
      t.ehat_efit = 1e-2;
      t.distance_decrease = 10.0;
      break;
    case Scenario::identity_suite:
      c.nl = NonlinearitySpec::free();
      c.solver.t_final = 2.0;
      c.solver.output_stride = 5;
      c.recipe = std::string(kRandomSmooth);
      c.recipe_params = {{"count", 3.0}, {"amplitude", 1.0}, {"width", 1.0}, {"spread", 5.0}, {"k_max", 1.0}};
      c.radii = {2.0, 5.0, 10.0};
      t.mass_drift = 1e-10;
      t.energy_drift = 1e-8;
      t.kinetic_splitting = 1e-8;
      t.flux_balance = 1e-4;
      break;
    case Scenario::incoming_lens:
    case Scenario::flux_classifier:
      c.dimension = 3;
      c.extent = 40.0;
      c.num_points = 4096;
      c.solver.method = Method::crank_nicolson_radial;
      c.solver.dt = 5e-4;
      c.interval = {0.0, 1.5};
      c.recipe = "gaussian_lens";
      c.stage_until = Stage::flux;
      t.kinetic_splitting = 1e-8;
      t.flux_balance = 1e-6;
      t.incoming_bound = true;
      if (scenario == Scenario::incoming_lens) {
        // The absorbing layer keeps waves reflected at R_max out of the
        // sampled radii; it starts at r = 20 and leaves the balance exact.
        c.solver.t_final = 20.0;
        c.solver.output_stride = 200;
        c.solver.sponge_width = 20.0;
        c.solver.sponge_strength = 4.0;
        c.recipe_params = {{"amplitude", 1.0}, {"width", 1.0}, {"b", 0.5}};
        c.radii = {1.0, 2.0, 5.0, 10.0, 15.0, 20.0};
        c.expected_verdict = "incoming_then_outgoing";
      } else {
        c.solver.t_final = 0.1;
        c.solver.output_stride = 10;
        c.recipe_params = {{"amplitude", 1.0}, {"width", 1.0}, {"b", 2.0}};
        c.radii = {0.5, 1.0, 2.0, 3.0};
        c.expected_verdict = "always_incoming";
        t.mass_drift = 1e-10;
        t.energy_drift = 1e-8;
      }
      break;
  }
  return c;
}

ExperimentConfig parse_config(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(ini_text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument("config: " + std::string(e.what()));
  }
  for (const auto& [section, body] : tree)
    if (body.empty() && !body.data().empty()) throw InvalidArgument("config: key '" + section + "' outside a section");

  const auto scenario = tree.get_optional<std::string>("run.scenario");
  if (!scenario) throw InvalidArgument("config: [run] scenario is required");
  ExperimentConfig c = default_config(parse_scenario(*scenario));

  // A config that names a recipe replaces the default recipe parameters.
  if (const auto initial = tree.get_child_optional("initial")) {
    if (initial->get_optional<std::string>("recipe")) c.recipe_params.clear();
  }
  // Same for the threshold set: listing any threshold replaces the defaults.
  if (const auto th = tree.get_child_optional("thresholds"); th && !th->empty()) c.thresholds = Thresholds{};

  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (section == "initial") {
      for (const auto& [key, value] : body) {
        if (key == "recipe") {
          c.recipe = value.data();
        } else {
          c.recipe_params[key] = parse_double(key, value.data());
        }
      }
      continue;
    }
    if (section == "thresholds") {
      for (const auto& [key, value] : body) {
        if (key == "incoming_bound") {
          const auto v = value.data();
          if (v != "true" && v != "false") throw InvalidArgument("config: incoming_bound must be true or false");
          c.thresholds.incoming_bound = v == "true";
        } else {
          threshold_slot(c.thresholds, key) = parse_double(key, value.data());
        }
      }
      continue;
    }
    const auto sec = table.find(section);
    if (sec == table.end()) throw InvalidArgument("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) throw InvalidArgument("config: unknown key [" + section + "] " + key);
      it->second(c, value.data());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto num = [](double v) { return format_double(v); };
  o << "[run]\n"
    << "scenario = " << scenario_name(c.scenario) << "\n"
    << "name = " << c.name << "\n"
    << "output_dir = " << c.output_dir.string() << "\n"
    << "seed = " << c.seed << "\n"
    << "stage_until = " << stage_name(c.stage_until) << "\n\n";
  o << "[grid]\n"
    << "dimension = " << c.dimension << "\n"
    << "extent = " << num(c.extent) << "\n"
    << "num_points = " << c.num_points << "\n\n";
  o << "[physics]\n"
    << "power = " << num(c.nl.power) << "\n"
    << "coefficient = " << num(c.nl.coefficient) << "\n\n";
  o << "[solver]\n"
    << "method = " << method_name(c.solver.method) << "\n"
    << "dt = " << num(c.solver.dt) << "\n"
    << "t_final = " << num(c.solver.t_final) << "\n"
    << "output_stride = " << c.solver.output_stride << "\n"
    << "picard_tol = " << num(c.solver.picard_tol) << "\n"
    << "picard_max_iter = " << c.solver.picard_max_iter << "\n"
    << "sponge_width = " << num(c.solver.sponge_width) << "\n"
    << "sponge_strength = " << num(c.solver.sponge_strength) << "\n\n";
  o << "[initial]\n"
    << "recipe = " << c.recipe << "\n";
  for (const auto& [k, v] : c.recipe_params) o << k << " = " << num(v) << "\n";
  o << "\n[diagnostics]\n"
    << "radii = " << join(c.radii) << "\n"
    << "classifier_radii = " << join(c.classifier_radii) << "\n"
    << "interval_lo = " << num(c.interval.lo) << "\n"
    << "interval_hi = " << num(c.interval.hi) << "\n"
    << "delta = " << num(c.delta) << "\n"
    << "box_min_width = " << num(c.box_min_width) << "\n"
    << "box_t_start = " << num(c.box_t_start) << "\n"
    << "test_functions = " << c.test_functions << "\n"
    << "test_width = " << num(c.test_width) << "\n"
    << "l1_tol = " << num(c.l1_tol) << "\n"
    << "reference_energy = " << num(c.reference_energy) << "\n"
    << "expected_verdict = " << c.expected_verdict << "\n\n";
  o << "[thresholds]\n";
  const auto& t = c.thresholds;
  const std::pair<const char*, const std::optional<double>*> rows[] = {
      {"mass_drift", &t.mass_drift},
      {"energy_drift", &t.energy_drift},
      {"kinetic_splitting", &t.kinetic_splitting},
      {"flux_balance", &t.flux_balance},
      {"reconstruction", &t.reconstruction},
      {"plaquette_winding", &t.plaquette_winding},
      {"ehat_reference", &t.ehat_reference},
      {"efit_reference", &t.efit_reference},
      {"ehat_efit", &t.ehat_efit},
      {"distance_decrease", &t.distance_decrease},
      {"identity", &t.identity},
  };
  for (const auto& [key, value] : rows)
    if (*value) o << key << " = " << num(**value) << "\n";
  o << "incoming_bound = " << (t.incoming_bound ? "true" : "false") << "\n";
  return o.str();
}

void validate(const ExperimentConfig& c, bool check_output) {
  if (c.name.empty()) throw InvalidArgument("config: name must not be empty");
  if (c.name.find_first_of("/\\") != std::string::npos) throw InvalidArgument("config: name must not contain '/'");
  const RadialGrid grid = c.grid();
  NonlinearitySpec::make(c.nl.power, c.nl.coefficient);
  c.solver.validate();
  if (c.solver.method != default_method(grid))
    throw InvalidArgument("config: method " + std::string(method_name(c.solver.method)) + " does not fit a " +
                          std::to_string(c.dimension) + "D grid");

  if (c.recipe == kRandomSmooth) {
    validate_random_smooth(c.recipe_params);
  } else {
    const Recipe r = parse_recipe(c.recipe);
    if (r == Recipe::custom_samples) throw InvalidArgument("config: custom_samples needs sample data, not a config");
    validate_recipe_params(r, c.recipe_params);
  }

  const double rmax = grid.max_radius();
  if (c.radii.empty()) throw InvalidArgument("config: radii must not be empty");
  for (double r : c.radii)
    if (!(r > 0.0 && r <= rmax)) throw InvalidArgument("config: radius " + format_double(r) + " is outside the grid");
  for (double r : c.classifier_radii)
    if (std::find(c.radii.begin(), c.radii.end(), r) == c.radii.end())
      throw InvalidArgument("config: classifier radius " + format_double(r) + " is not in radii");
  const double lo = grid.is_line() ? grid.r_min() : 0.0;
  if (!(c.interval.lo < c.interval.hi) || c.interval.lo < lo || c.interval.hi > rmax)
    throw InvalidArgument("config: interval must satisfy " + format_double(lo) + " <= lo < hi <= " + format_double(rmax));
  if (c.delta < 0.0) throw InvalidArgument("config: delta must be >= 0");
  if (!(c.box_min_width > 0.0)) throw InvalidArgument("config: box_min_width must be positive");
  if (c.box_t_start < 0.0 || c.box_t_start >= c.solver.t_final)
    throw InvalidArgument("config: box_t_start must lie in [0, t_final)");
  if (c.test_functions < 0) throw InvalidArgument("config: test_functions must be >= 0");
  if (!(c.test_width > 0.0 && c.test_width <= 1.0)) throw InvalidArgument("config: test_width must lie in (0, 1]");
  if (c.l1_tol < 0.0) throw InvalidArgument("config: l1_tol must be >= 0");
  if (c.reference_energy < 0.0) throw InvalidArgument("config: reference_energy must be >= 0");

  if (check_output) {
    if (c.output_dir.empty()) throw InvalidArgument("config: output_dir must not be empty");
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec) throw InvalidArgument("config: cannot create output_dir " + c.output_dir.string() + ": " + ec.message());
    const auto probe = c.output_dir / ".write_probe";
    {
      std::ofstream out(probe);
      if (!out) throw InvalidArgument("config: output_dir " + c.output_dir.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
  }
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::filesystem::path& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) return std::filesystem::path(env) / config.name;
  return config.output_dir;
}

WaveField initial_field(const ExperimentConfig& config) {
  const RadialGrid grid = config.grid();
  if (config.recipe == kRandomSmooth) {
    validate_random_smooth(config.recipe_params);
    return random_smooth(config, grid);
  }
  return make_initial_condition(parse_recipe(config.recipe), config.recipe_params, grid, config.nl);
}

}  // namespace solitonscope
