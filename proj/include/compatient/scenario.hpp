#pragma once

#include "compatient/circulation.hpp"
#include "compatient/coupling.hpp"
#include "compatient/diabetes.hpp"
#include "compatient/kernel/integrator.hpp"
#include "compatient/pk.hpp"
#include "compatient/ras.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace compatient::scenario {

struct PatientProfile {
  std::optional<double> age_years;  // absent for the age-independent rows
  double baseline_glucose = 100.0;  // mg/dL
  std::string abp_source = "builtin";  // or a CSV path
  double vitamin_D = 30.0;  // ng/mL
  bool infected = false;
  double infection_onset_h = 0.0;
  bool renal_impaired = false;
  bool acei_enabled = false;
  double acei_dose = 0.0;  // mg
  double doses_per_day = 1.0;
  double heparin_0 = 0.0;  // U/mL
  diabetes::LifestyleSchedule lifestyle = diabetes::LifestyleSchedule::standard();

  /// Throws ConfigError for impossible values, warns for values outside the
  /// customisation ranges (age 20-70, glucose 100-200, dose 0-5 mg, heparin
  /// 5000-10000 U/mL when given).
  void validate() const;
};

/// Every tunable constant of the pipeline, exposed as dotted names
/// ("pk.k_a", "circulation.pc.C", ...).
struct ModelParameters {
  pk::PkParams pk;
  ras::RasParams ras;
  diabetes::DiabetesParams diabetes;
  coupling::CouplingParams coupling;
  circulation::CirculationParams circulation = circulation::CirculationParams::defaults();
  double cyt_fallback = 0.0;  // cytokine level fed to the diabetes stage

  ParameterSet to_parameter_set() const;
  /// Applies entries of `overrides`; unknown names raise ConfigError.
  void apply(const ParameterSet& overrides);
};

inline const std::vector<std::string> kAllStages{"diabetes", "pk", "ras", "coupling", "circulation"};

struct ScenarioConfig {
  std::string label;
  PatientProfile profile;
  std::set<std::string> enabled_modules{kAllStages.begin(), kAllStages.end()};
  double horizon_days = 5.0;
  int cardiac_beats = 30;
  int discard_beats = 10;
  bool refresh_daily = false;  ///< also run the circulation with each day's inflammation
  ModelParameters params;
  IntegratorConfig solver;

  bool enabled(const std::string& stage) const { return enabled_modules.count(stage) != 0; }
  void validate() const;
};

/// Metric value or NA (stage skipped).
using MetricValue = std::optional<double>;

struct ScenarioResult {
  std::string label;
  std::map<std::string, TimeSeries> series;  // by stage id
  std::vector<std::pair<std::string, MetricValue>> metrics;  // fixed key order
  std::vector<std::string> warnings;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
  MetricValue metric(const std::string& key) const;
};

/// Metric keys in output order; identical for every scenario.
const std::vector<std::string>& metric_keys();

/// Pulmonary and aortic compartments summarized in the metrics.
inline const std::vector<std::string> kReportedVessels{"aop", "pap", "pad", "ps", "pc", "pv"};

/// The eight rows of the comorbidity cohort: H, D, R, C+T, V, C+V, C+V+T, C+V+3T.
std::vector<ScenarioConfig> builtin_cohort();
/// One builtin row by label; ConfigError when unknown.
ScenarioConfig builtin(const std::string& label);

/// Runs the pipeline diabetes -> pk -> ras -> coupling -> circulation.
/// Throws on configuration or numerical failure.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Runs every scenario; a failing one records its error and the rest continue.
/// `jobs` > 1 runs scenarios on worker threads; results keep input order.
std::vector<ScenarioResult> run_cohort(const std::vector<ScenarioConfig>& cohort, int jobs = 1);

/// Profile fields that a sweep may vary.
inline const std::vector<std::string> kSweepPaths{"age", "baseline_glucose", "acei_dose", "vitamin_D", "heparin_0",
                                                  "infection_onset_h"};
/// Copy of `cfg` with one profile field set; ConfigError for unknown paths.
ScenarioConfig with_profile_value(ScenarioConfig cfg, const std::string& path, double value);

/// Reads a scenario file (key = value lines). Throws ConfigError with line.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
/// Manifest: one scenario file per line, relative to the manifest.
std::vector<ScenarioConfig> load_manifest(const std::string& path);

/// Applies COMPATIENT_PARAMS (if set) to the parameters of `cfg`.
void apply_environment_overrides(ScenarioConfig& cfg);

}  // namespace compatient::scenario
