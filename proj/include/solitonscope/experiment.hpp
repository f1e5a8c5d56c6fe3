#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "solitonscope/error.hpp"
#include "solitonscope/hydrodynamics.hpp"
#include "solitonscope/initial_conditions.hpp"
#include "solitonscope/solver.hpp"
#include "solitonscope/table.hpp"

namespace solitonscope {

enum class Scenario { soliton_regression, incoming_lens, flux_classifier, phase_slope_study, identity_suite };

Scenario parse_scenario(std::string_view name);
std::string_view scenario_name(Scenario scenario);

/// Pipeline stages in execution order. A run stops after `stage_until`.
enum class Stage { evolve, hydro, flux, phase, profile };

Stage parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

/// Pass/fail thresholds. A check runs only when its threshold is set.
struct Thresholds {
  std::optional<double> mass_drift;         // max relative mass drift
  std::optional<double> energy_drift;       // max relative energy drift
  std::optional<double> kinetic_splitting;  // max relative splitting error
  std::optional<double> flux_balance;       // max |2 cum + dM| / mass(0)
  std::optional<double> reconstruction;     // lift error / max |psi|
  std::optional<double> plaquette_winding;  // max |winding|
  std::optional<double> ehat_reference;     // |E_hat - E_ref| / E_ref
  std::optional<double> efit_reference;     // |E_fit - E_ref| / E_ref
  std::optional<double> ehat_efit;          // |E_hat - E_fit| / E_fit
  std::optional<double> distance_decrease;  // max distance / final distance, lower bound
  std::optional<double> identity;           // |lhs - rhs| / max(|lhs|, |rhs|)
  /// Require 0 <= -cumulative <= mass(0)/2 while IWC holds.
  bool incoming_bound = false;

  bool operator==(const Thresholds&) const = default;
};

/// Everything a run needs. Serialized as INI:
///
///   [run]         scenario name output_dir seed stage_until
///   [grid]        dimension extent num_points
///   [physics]     power coefficient
///   [solver]      method dt t_final output_stride picard_tol picard_max_iter
///                 sponge_width sponge_strength
///   [initial]     recipe and its parameters
///   [diagnostics] radii classifier_radii interval_lo interval_hi delta
///                 box_min_width box_t_start test_functions test_width
///                 l1_tol reference_energy expected_verdict
///   [thresholds]  see Thresholds
///
/// `recipe` is one of the initial-condition recipes or random_smooth
/// (count, amplitude, width, spread, k_max), which draws Gaussian packets
/// from `seed`.
struct ExperimentConfig {
  Scenario scenario = Scenario::soliton_regression;
  std::string name;
  std::filesystem::path output_dir;
  std::uint64_t seed = 1;
  Stage stage_until = Stage::profile;

  int dimension = 1;
  /// Half length L on the line, R_max on the radial grid.
  double extent = 0.0;
  std::size_t num_points = 0;

  NonlinearitySpec nl;
  SolverConfig solver;

  std::string recipe;
  RecipeParams recipe_params;

  std::vector<double> radii;
  /// Radii fed to classify_flux; empty means all of `radii`.
  std::vector<double> classifier_radii;
  Interval interval;
  /// Good-box level; 0 selects default_delta() on the interval.
  double delta = 0.0;
  double box_min_width = 0.5;
  double box_t_start = 0.0;
  int test_functions = 4;
  /// Test-function half width as a fraction of the box half width.
  double test_width = 0.4;
  /// Excursion budget of classify_flux relative to mass(0).
  double l1_tol = 1e-3;
  /// Energy of the exact soliton the run should reproduce; 0 when unknown.
  double reference_energy = 0.0;
  std::string expected_verdict;

  Thresholds thresholds;

  RadialGrid grid() const;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig default_config(Scenario scenario);

/// Reads INI text. [run] scenario picks the defaults that the remaining keys
/// override. Unknown sections or keys are rejected.
ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_ini(const ExperimentConfig& config);

/// Grid, solver, recipe and diagnostic checks that need no computation.
/// With check_output, also creates output_dir and verifies it is writable.
void validate(const ExperimentConfig& config, bool check_output = true);

/// --output-dir wins, then $OUTPUT_DIR/<name>, then the configured path.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::filesystem::path& cli_override);

/// Initial field for the configured recipe.
WaveField initial_field(const ExperimentConfig& config);

enum class FluxVerdict { always_incoming, incoming_then_outgoing, mixed };

FluxVerdict parse_verdict(std::string_view name);
std::string_view verdict_name(FluxVerdict verdict);

/// Sign pattern of flux(t) at radius index `radius`. Runs of one sign whose
/// time integral is at most l1_tol are absorbed into their neighbours,
/// positive runs first; a lone run is kept. Zero flux counts as incoming.
FluxVerdict classify_flux_at(const FluxSeries& series, std::size_t radius, double l1_tol);
/// always_incoming if every radius is, incoming_then_outgoing if every
/// radius switches at most once from - to +, mixed otherwise.
FluxVerdict classify_flux(const FluxSeries& series, double l1_tol);

/// Tables and scalars written by a run; report verdicts are computed from
/// these alone.
struct RunArtifacts {
  Table conserved;
  Table iwc;
  Table splitting;
  Table flux;
  Table phase;
  Table distance;
  Table velocity;
  Table identities;
  nlohmann::json metrics = nlohmann::json::object();

  /// File name and table of every non-empty table.
  std::vector<std::pair<std::string, const Table*>> tables() const;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<=", ">=" or "==".
  std::string relation = "<=";
  bool passed = false;
  /// Threshold set but the data it needs was not produced.
  bool skipped = false;
};

struct RunReport {
  ExperimentConfig config;
  bool complete = false;
  std::string failed_stage;
  std::string error;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  bool passed() const;
  nlohmann::json to_json() const;
};

/// Pure function of the artifacts and the thresholds in the config.
RunReport summarize(const ExperimentConfig& config, const RunArtifacts& artifacts);

/// Error raised by run(), naming the stage that failed.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(std::string(stage_name(stage)) + ": " + what), stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// evolve -> hydro/flux -> good boxes -> lift -> slope -> profile fit ->
/// distances, writing CSV tables, metrics.json, report.json and MANIFEST
/// into config.output_dir. On a stage error the finished artifacts and a
/// MANIFEST marked incomplete are written before StageError is thrown.
RunReport run(const ExperimentConfig& config);

/// Same, keeping the artifacts in memory only.
RunReport run(const ExperimentConfig& config, RunArtifacts& artifacts);

/// Re-reads a run directory and recomputes the report from its artifacts.
RunArtifacts load_artifacts(const std::filesystem::path& run_dir);
RunReport report_from_dir(const std::filesystem::path& run_dir);

void write_artifacts(const RunArtifacts& artifacts, const RunReport& report, const std::filesystem::path& dir);

}  // namespace solitonscope
