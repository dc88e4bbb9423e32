#include "compatient/cli/cli.hpp"
#include "compatient/errors.hpp"
#include "compatient/io/keyvalue.hpp"
#include "compatient/io/report.hpp"
#include "compatient/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <sstream>

namespace compatient::cli {

namespace {

namespace fs = std::filesystem;
using scenario::ScenarioConfig;
using scenario::ScenarioResult;

struct Common {
  std::string out_dir;
  std::optional<double> rtol;
  std::optional<double> atol;
  std::optional<int> beats;
  std::string method;
  std::string format = "csv+svg";
  bool seedless = false;
  bool refresh_daily = false;
  int jobs = 1;
};

void add_common(CLI::App& app, Common& c, bool jobs) {
  app.add_option("--out", c.out_dir, "Output directory")->required();
  app.add_option("--rtol", c.rtol, "Relative tolerance of the adaptive solver");
  app.add_option("--atol", c.atol, "Absolute tolerance of the adaptive solver");
  app.add_option("--beats", c.beats, "Number of simulated heart beats");
  app.add_option("--method", c.method, "adaptive-stiff | adaptive-explicit | fixed-rk4-oracle");
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "csv+svg"}));
  app.add_flag("--seedless", c.seedless, "Assert that the run uses no random numbers (always true)");
  app.add_flag("--refresh-daily", c.refresh_daily, "Also run the circulation with each day's inflammation");
  if (jobs) app.add_option("--jobs", c.jobs, "Scenarios run in parallel")->check(CLI::PositiveNumber);
}

void apply_common(const Common& c, ScenarioConfig& cfg) {
  if (c.rtol) cfg.solver.rtol = *c.rtol;
  if (c.atol) cfg.solver.atol = *c.atol;
  if (c.beats) {
    cfg.cardiac_beats = *c.beats;
    cfg.discard_beats = std::min(cfg.discard_beats, std::max(0, *c.beats - 1));
    if (*c.beats < 1) throw ConfigError("--beats", "must be >= 1");
  }
  if (!c.method.empty()) cfg.solver.method = parse_method(c.method);
  if (c.refresh_daily) cfg.refresh_daily = true;
  scenario::apply_environment_overrides(cfg);
  cfg.validate();
}

void report_warnings(const ScenarioResult& r, std::ostream& err) {
  for (const auto& w : r.warnings) err << "warning [" << r.label << "]: " << w << '\n';
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    values.push_back(io::parse_number(item, "--values"));
  }
  if (values.empty()) throw ConfigError("--values", "needs at least one value");
  return values;
}

ScenarioConfig base_scenario(const std::string& builtin, const std::string& file) {
  if (!builtin.empty() && !file.empty()) throw ConfigError("--builtin", "give either --builtin or --scenario");
  if (!file.empty()) return scenario::load_scenario(file);
  if (builtin.empty()) throw ConfigError("--builtin", "give --builtin LABEL or --scenario FILE");
  return scenario::builtin(builtin);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"compatient: computational patient simulator (pharmacokinetics, renin-angiotensin system, "
               "type-2 diabetes, lumped circulation)",
               "compatient"};
  app.footer(kDisclaimer);
  app.require_subcommand(1);

  Common run_opts, cohort_opts, sweep_opts;
  std::string run_builtin, run_file;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("--builtin", run_builtin, "Builtin scenario label (H, D, R, C+T, V, C+V, C+V+T, C+V+3T)");
  run_cmd->add_option("--scenario", run_file, "Scenario file (key = value)");
  add_common(*run_cmd, run_opts, false);

  std::string manifest;
  auto* cohort_cmd = app.add_subcommand("cohort", "Run the builtin cohort or a manifest of scenario files");
  cohort_cmd->add_option("--manifest", manifest, "File listing scenario files, one per line");
  add_common(*cohort_cmd, cohort_opts, true);

  std::string sweep_builtin, sweep_file, sweep_param, sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Vary one profile field over a list of values");
  sweep_cmd->add_option("--builtin", sweep_builtin, "Base builtin scenario");
  sweep_cmd->add_option("--scenario", sweep_file, "Base scenario file");
  sweep_cmd->add_option("--param", sweep_param, "Profile field to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  add_common(*sweep_cmd, sweep_opts, true);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  }

  try {
    if (run_cmd->parsed()) {
      ScenarioConfig cfg = base_scenario(run_builtin, run_file);
      apply_common(run_opts, cfg);
      const ScenarioResult result = scenario::run_scenario(cfg);
      report_warnings(result, err);
      io::write_bundle(run_opts.out_dir, result, run_opts.format == "csv+svg");
      out << io::format_metrics(result);
      return 0;
    }

    if (cohort_cmd->parsed()) {
      auto cohort = manifest.empty() ? scenario::builtin_cohort() : scenario::load_manifest(manifest);
      for (auto& cfg : cohort) apply_common(cohort_opts, cfg);
      const auto results = scenario::run_cohort(cohort, cohort_opts.jobs);
      const fs::path root = cohort_opts.out_dir;
      fs::create_directories(root);
      int failed = 0;
      for (const auto& r : results) {
        report_warnings(r, err);
        if (!r.ok()) {
          err << "error [" << r.label << "]: " << r.error << '\n';
          ++failed;
          continue;
        }
        io::write_bundle(root / r.label, r, cohort_opts.format == "csv+svg");
      }
      io::write_text(root / "comparison.csv", io::comparison_csv(results));
      if (cohort_opts.format == "csv+svg") io::write_overlays(root, results);
      out << io::comparison_csv(results);
      return failed ? 1 : 0;
    }

    if (sweep_cmd->parsed()) {
      const std::vector<double> values = parse_values(sweep_values);
      ScenarioConfig base = base_scenario(sweep_builtin.empty() && sweep_file.empty() ? "C+V" : sweep_builtin,
                                          sweep_file);
      std::vector<ScenarioConfig> runs;
      for (double v : values) {
        runs.push_back(scenario::with_profile_value(base, sweep_param, v));
        apply_common(sweep_opts, runs.back());
      }
      const auto results = scenario::run_cohort(runs, sweep_opts.jobs);
      const fs::path root = sweep_opts.out_dir;
      fs::create_directories(root);
      const std::string table = io::sweep_csv(sweep_param, values, results);
      io::write_text(root / ("sweep_" + sweep_param + ".csv"), table);
      out << table;
      int failed = 0;
      for (const auto& r : results) {
        report_warnings(r, err);
        if (!r.ok()) {
          err << "error [" << r.label << "]: " << r.error << '\n';
          ++failed;
        }
      }
      return failed ? 1 : 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const WiringError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NonFiniteState& e) {
    err << "numerical error in module '" << e.module() << "', variable '" << e.variable() << "': " << e.what()
        << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error in module '" << e.module() << "': " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace compatient::cli
