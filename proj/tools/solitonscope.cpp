// solitonscope: run, suite and report subcommands.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 execution error.

#include <algorithm>
#include <future>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "solitonscope/experiment.hpp"

namespace fs = std::filesystem;
using namespace solitonscope;

namespace {

constexpr int kPass = 0, kCheckFailed = 1, kError = 2;

std::string describe(const RunReport& r) {
  std::ostringstream o;
  for (const auto& c : r.checks) {
    const char* tag = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
    o << "  " << tag << "  " << c.name << "  ";
    if (c.name == "flux_verdict")
      o << (c.skipped ? "-" : verdict_name(static_cast<FluxVerdict>(c.value))) << " (expected "
        << verdict_name(static_cast<FluxVerdict>(c.threshold)) << ")\n";
    else
      o << std::setprecision(6) << c.value << " " << c.relation << " " << c.threshold << "\n";
  }
  for (const auto& w : r.warnings) o << "  warning: " << w << "\n";
  return o.str();
}

int exit_code(const RunReport& r) { return r.passed() ? kPass : kCheckFailed; }

struct Outcome {
  int code = kError;
  std::string text;
};

Outcome run_one(ExperimentConfig config) {
  Outcome out;
  std::ostringstream o;
  o << config.name << " (" << scenario_name(config.scenario) << ") -> " << config.output_dir.string() << "\n";
  try {
    const auto report = run(config);
    out.code = exit_code(report);
    o << describe(report) << "  " << (out.code == kPass ? "passed" : "FAILED") << "\n";
  } catch (const std::exception& e) {
    o << "  error: " << e.what() << "\n";
    out.code = kError;
  }
  out.text = o.str();
  return out;
}

int cmd_run(const fs::path& config_path, const fs::path& output_dir, const std::string& stage_until) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
    config.output_dir = resolve_output_dir(config, output_dir);
    if (!stage_until.empty()) config.stage_until = parse_stage(stage_until);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  const auto out = run_one(config);
  std::cout << out.text;
  return out.code;
}

int cmd_suite(const fs::path& dir) {
  std::vector<ExperimentConfig> configs;
  try {
    if (!fs::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".ini") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InvalidArgument("no .ini configs in " + dir.string());
    std::set<fs::path> dirs;
    for (const auto& f : files) {
      auto c = load_config(f);
      c.output_dir = resolve_output_dir(c, "");
      if (!dirs.insert(fs::weakly_canonical(c.output_dir)).second)
        throw InvalidArgument(f.string() + ": output_dir " + c.output_dir.string() + " is shared with another run");
      configs.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }

  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Outcome> outcomes(configs.size());
  for (std::size_t start = 0; start < configs.size(); start += width) {
    std::vector<std::future<Outcome>> batch;
    for (std::size_t i = start; i < std::min(configs.size(), start + width); ++i)
      batch.push_back(std::async(std::launch::async, run_one, configs[i]));
    for (std::size_t i = 0; i < batch.size(); ++i) outcomes[start + i] = batch[i].get();
  }
  int code = kPass;
  for (const auto& o : outcomes) {
    std::cout << o.text;
    code = std::max(code, o.code);
  }
  return code;
}

int cmd_report(const fs::path& run_dir) {
  try {
    const auto report = report_from_dir(run_dir);
    std::cout << report.config.name << " (" << scenario_name(report.config.scenario) << ")"
              << (report.complete ? "" : " incomplete, failed stage " + report.failed_stage) << "\n"
              << describe(report);
    if (!report.complete) return kError;
    return exit_code(report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soliton resolution experiments for focusing NLS"};
  app.require_subcommand(1);

  fs::path config_path, output_dir, suite_dir, run_dir;
  std::string stage_until;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment config");
  run_cmd->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--output-dir", output_dir, "Override the output directory");
  run_cmd->add_option("--stage-until", stage_until, "Last stage to run")
      ->check(CLI::IsMember({"evolve", "hydro", "flux", "phase", "profile"}));

  auto* suite_cmd = app.add_subcommand("suite", "Run every .ini config in a directory");
  suite_cmd->add_option("dir", suite_dir, "Config directory")->required();

  auto* report_cmd = app.add_subcommand("report", "Recompute the report of a finished run");
  report_cmd->add_option("run_dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kError;
  }

  if (*run_cmd) return cmd_run(config_path, output_dir, stage_until);
  if (*suite_cmd) return cmd_suite(suite_dir);
  return cmd_report(run_dir);
}
