#include "compatient/scenario.hpp"
#include "compatient/diagnostics.hpp"
#include "compatient/errors.hpp"
#include "compatient/io/csv.hpp"
#include "compatient/io/keyvalue.hpp"
#include "compatient/kernel/composition.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <thread>

namespace compatient::scenario {

namespace {

void check_range(const std::string& field, double v, double lo, double hi) {
  if (v < lo || v > hi) {
    warn(field + " = " + io::format_number(v) + " is outside the customisation range [" + io::format_number(lo) +
         ", " + io::format_number(hi) + "]");
  }
}

}  // namespace

void PatientProfile::validate() const {
  if (age_years) {
    if (!(*age_years > 0.0)) throw ConfigError("age", "must be > 0");
    check_range("age", *age_years, 20.0, 70.0);
  }
  if (!(baseline_glucose > 0.0)) throw ConfigError("baseline_glucose", "must be > 0");
  check_range("baseline_glucose", baseline_glucose, 100.0, 200.0);
  if (!(vitamin_D >= 0.0)) throw ConfigError("vitamin_D", "must be >= 0");
  if (!(acei_dose >= 0.0)) throw ConfigError("acei_dose", "must be >= 0");
  if (acei_enabled) check_range("acei_dose", acei_dose, 0.0, 5.0);
  if (doses_per_day != 0.0 && doses_per_day != 1.0) throw ConfigError("doses_per_day", "must be 0 or 1");
  if (!(heparin_0 >= 0.0)) throw ConfigError("heparin_0", "must be >= 0");
  if (heparin_0 > 0.0) check_range("heparin_0", heparin_0, 5000.0, 10000.0);
  if (!(infection_onset_h >= 0.0)) throw ConfigError("infection_onset_h", "must be >= 0");
  lifestyle.validate();
}

void ScenarioConfig::validate() const {
  if (label.empty()) throw ConfigError("label", "must not be empty");
  if (label.find_first_of("/\\ \t") != std::string::npos) {
    throw ConfigError("label", "must not contain path separators or spaces");
  }
  for (const auto& m : enabled_modules) {
    if (std::find(kAllStages.begin(), kAllStages.end(), m) == kAllStages.end()) {
      throw ConfigError("modules", "unknown module '" + m + "'");
    }
  }
  if (!(horizon_days > 0.0)) throw ConfigError("horizon_days", "must be > 0");
  if (cardiac_beats < 1) throw ConfigError("cardiac_beats", "must be >= 1");
  if (discard_beats < 0 || discard_beats >= cardiac_beats) {
    throw ConfigError("discard_beats", "must lie in [0, cardiac_beats)");
  }
  if (enabled("circulation") && !profile.age_years) {
    throw ConfigError("age", "the circulation stage needs an age");
  }
  profile.validate();
  solver.validate();
  params.pk.validate();
  params.ras.validate();
  params.diabetes.validate();
  params.coupling.validate();
  params.circulation.validate();
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

struct CircField {
  std::string name;
  double* value;
};

template <typename M>
std::vector<CircField> circulation_fields(M& c) {
  std::vector<CircField> f{{"period", &c.period_s},
                           {"baro.zeta", &c.baro.zeta},
                           {"baro.omega", &c.baro.omega},
                           {"baro.n0", &c.baro.n0},
                           {"baro.gain", &c.baro.gain},
                           {"baro.p_ref", &c.baro.p_ref},
                           {"compliance_floor", &c.compliance_floor}};
  for (auto& v : c.vessels) {
    f.push_back({v.id + ".C", &v.C});
    f.push_back({v.id + ".V_u", &v.V_u});
  }
  for (auto& ch : c.chambers) {
    f.push_back({ch.id + ".E_min", &ch.E_min});
    f.push_back({ch.id + ".E_max", &ch.E_max});
  }
  for (auto& r : c.resistors) f.push_back({"R." + r.from + "." + r.to, &r.R});
  return f;
}

}  // namespace

ParameterSet ModelParameters::to_parameter_set() const {
  ParameterSet s;
  export_parameters(pk, pk::kParamFields, "pk.", s);
  export_parameters(ras, ras::kParamFields, "ras.", s);
  export_parameters(diabetes, diabetes::kParamFields, "diabetes.", s);
  export_parameters(coupling, coupling::kParamFields, "coupling.", s);
  s.define("diabetes.cyt_fallback", cyt_fallback, "1", Provenance::default_value);
  auto copy = circulation;
  for (const auto& f : circulation_fields(copy)) {
    s.define("circulation." + f.name, *f.value, "", Provenance::default_value);
  }
  return s;
}

void ModelParameters::apply(const ParameterSet& overrides) {
  ParameterSet all = to_parameter_set();
  all.merge(overrides);
  import_parameters(all, pk::kParamFields, "pk.", pk);
  import_parameters(all, ras::kParamFields, "ras.", ras);
  import_parameters(all, diabetes::kParamFields, "diabetes.", diabetes);
  import_parameters(all, coupling::kParamFields, "coupling.", coupling);
  cyt_fallback = all.value("diabetes.cyt_fallback");
  for (const auto& f : circulation_fields(circulation)) *f.value = all.value("circulation." + f.name);
}

// ---------------------------------------------------------------------------
// Cohort

std::vector<ScenarioConfig> builtin_cohort() {
  constexpr double kDiabetic = 170.0;
  constexpr double kDose = 5.0;
  const std::set<std::string> no_circulation{"diabetes", "pk", "ras", "coupling"};

  std::vector<ScenarioConfig> cohort;
  auto add = [&](std::string label) -> ScenarioConfig& {
    cohort.emplace_back();
    cohort.back().label = std::move(label);
    return cohort.back();
  };

  add("H").profile.age_years = 20.0;

  auto& d = add("D");
  d.profile.baseline_glucose = kDiabetic;
  d.enabled_modules = no_circulation;

  auto& r = add("R");
  r.profile.renal_impaired = true;
  r.profile.acei_enabled = true;
  r.profile.acei_dose = kDose;
  r.enabled_modules = no_circulation;

  auto& ct = add("C+T");
  ct.profile.age_years = 70.0;
  ct.profile.baseline_glucose = kDiabetic;
  ct.profile.renal_impaired = true;
  ct.profile.acei_enabled = true;
  ct.profile.acei_dose = kDose;

  auto& v = add("V");
  v.profile.age_years = 70.0;
  v.profile.infected = true;

  auto& cv = add("C+V");
  cv.profile.age_years = 70.0;
  cv.profile.baseline_glucose = kDiabetic;
  cv.profile.renal_impaired = true;
  cv.profile.infected = true;

  ScenarioConfig cvt = cv;
  cvt.label = "C+V+T";
  cvt.profile.acei_enabled = true;
  cvt.profile.acei_dose = kDose;
  cohort.push_back(cvt);

  ScenarioConfig cv3t = cvt;
  cv3t.label = "C+V+3T";
  cv3t.profile.heparin_0 = 5000.0;
  cv3t.profile.vitamin_D = 40.0;
  cohort.push_back(cv3t);
  return cohort;
}

ScenarioConfig builtin(const std::string& label) {
  for (auto& cfg : builtin_cohort()) {
    if (cfg.label == label) return cfg;
  }
  throw ConfigError("builtin", "unknown builtin scenario '" + label + "' (expected H, D, R, C+T, V, C+V, C+V+T, C+V+3T)");
}

ScenarioConfig with_profile_value(ScenarioConfig cfg, const std::string& path, double value) {
  auto& p = cfg.profile;
  if (path == "age") {
    p.age_years = value;
  } else if (path == "baseline_glucose") {
    p.baseline_glucose = value;
  } else if (path == "acei_dose") {
    p.acei_dose = value;
    p.acei_enabled = value > 0.0;
  } else if (path == "vitamin_D") {
    p.vitamin_D = value;
  } else if (path == "heparin_0") {
    p.heparin_0 = value;
  } else if (path == "infection_onset_h") {
    p.infection_onset_h = value;
  } else {
    throw ConfigError("param", "'" + path + "' is not a sweepable profile field");
  }
  cfg.label += "@" + path + "=" + io::format_number(value);
  return cfg;
}

// ---------------------------------------------------------------------------
// Pipeline

MetricValue ScenarioResult::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics) {
    if (k == key) return v;
  }
  throw std::out_of_range("no metric '" + key + "'");
}

const std::vector<std::string>& metric_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k{"age_years",
                               "baseline_glucose_mgdl",
                               "insulin_function",
                               "glucose_peak_mgdl",
                               "glucose_mean_mgdl",
                               "drug_peak_mgL",
                               "drug_trough_day1_mgL",
                               "drug_trough_day5_mgL",
                               "angII_final_pmolL",
                               "at1r_final_pmolL",
                               "k_ace2_final_per_h",
                               "ir_steady",
                               "ir_final",
                               "alpha_met",
                               "compliance_scale",
                               "heparin_0_UmL",
                               "vitamin_D_ngmL",
                               "pressure_offset_mmHg"};
    for (const auto& v : kReportedVessels) {
      k.push_back("mean_" + v + "_mmHg");
      k.push_back("sd_" + v + "_mmHg");
      k.push_back("pulse_" + v + "_mmHg");
    }
    k.push_back("baro_mean_Hz");
    return k;
  }();
  return keys;
}

namespace {

constexpr double kHour = 3600.0;
constexpr double kDay = 86400.0;

Signal abp_signal(const PatientProfile& profile, double period_s) {
  if (profile.abp_source == "builtin") return circulation::builtin_abp(period_s);
  std::vector<double> t;
  std::vector<double> p;
  io::read_abp_csv(profile.abp_source, t, p);
  return circulation::abp_from_samples(std::move(t), std::move(p));
}

pk::PkParams pk_params(const ScenarioConfig& cfg) {
  pk::PkParams p = cfg.params.pk;
  p.dose_mg = cfg.profile.acei_enabled ? cfg.profile.acei_dose : 0.0;
  p.doses_per_day = cfg.profile.doses_per_day;
  p.renal_impaired = cfg.profile.renal_impaired;
  return p;
}

std::vector<std::pair<double, double>> last_day(double horizon_s) {
  return {{std::max(0.0, horizon_s - kDay), horizon_s}};
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  WarningCapture capture;
  cfg.validate();
  const auto& P = cfg.params;
  const auto& profile = cfg.profile;
  const double horizon_s = cfg.horizon_days * kDay;
  const double period = P.circulation.period_s;

  CompositionGraph graph;
  const auto meal_windows = diabetes::post_meal_windows(profile.lifestyle, cfg.horizon_days);
  diabetes::DiabetesParams dp = P.diabetes;

  auto feed_glucose = [&](const std::string& target) {
    if (cfg.enabled("diabetes")) {
      graph.connect({{"diabetes", "G"}, {target, "G"}, WireMode::max, std::nullopt, meal_windows});
    } else {
      graph.bind({target, "G"}, Signal::constant(profile.baseline_glucose, "mg/dL"));
    }
  };
  auto feed_drug = [&](const std::string& target) {
    if (cfg.enabled("pk")) {
      graph.connect({{"pk", "drug"}, {target, "drug"}, WireMode::sample_hold});
    } else {
      graph.bind({target, "drug"}, Signal::constant(0.0, "mg/L"));
    }
  };

  if (cfg.enabled("diabetes")) {
    dp = diabetes::calibrate(P.diabetes, profile.baseline_glucose, P.cyt_fallback);
    auto module = std::make_shared<diabetes::DiabetesModule>(dp, profile.lifestyle);
    module->set_initial_state(diabetes::fasting_state(dp, P.cyt_fallback));
    graph.add(module, {horizon_s, 0.05 * kHour});
    graph.bind({"diabetes", "Cyt"}, Signal::constant(P.cyt_fallback, "1"));
  }
  const pk::PkParams pkp = pk_params(cfg);
  if (cfg.enabled("pk")) {
    graph.add(std::make_shared<pk::DrugSource>(pkp, cfg.horizon_days), {horizon_s, 0.1 * kHour});
  }
  if (cfg.enabled("ras")) {
    graph.add(std::make_shared<ras::RasModule>(P.ras, ras::InfectionStatus{profile.infected, profile.infection_onset_h}),
              {horizon_s, 0.1 * kHour});
    feed_glucose("ras");
    feed_drug("ras");
  }
  if (cfg.enabled("coupling")) {
    graph.add(std::make_shared<coupling::InflammationModule>(P.coupling), {horizon_s, 0.1 * kHour});
    if (cfg.enabled("ras")) {
      graph.connect({{"ras", "k_ACE2"},
                     {"coupling", "ace2_excess"},
                     WireMode::linear,
                     Affine{1.0, -P.ras.k_ACE2_0, "1/h"},
                     {}});
    } else {
      graph.bind({"coupling", "ace2_excess"}, Signal::constant(0.0, "1/h"));
    }
    feed_drug("coupling");
    feed_glucose("coupling");
  }

  std::optional<double> alpha;
  if (profile.age_years) alpha = coupling::methylation_factor(*profile.age_years, P.coupling);
  const double circ_horizon = cfg.cardiac_beats * period;
  circulation::CirculationParams cp = P.circulation;
  cp.compliance_floor = P.coupling.compliance_floor;
  const Signal abp = cfg.enabled("circulation") ? abp_signal(profile, period) : Signal{};
  if (cfg.enabled("circulation")) {
    StageOptions opts{circ_horizon, period / 200.0, circulation::default_config(cfg.solver), std::nullopt};
    graph.add(std::make_shared<circulation::CirculationModule>(cp), opts);
    graph.add(std::make_shared<coupling::TreatmentSource>(profile.heparin_0, profile.vitamin_D, P.coupling),
              {circ_horizon, period / 200.0});
    if (cfg.enabled("coupling")) {
      graph.connect({{"coupling", "IR"},
                     {"circulation", "compliance_scale"},
                     WireMode::mean,
                     Affine{-*alpha / 100.0, *alpha, "1"},
                     last_day(horizon_s)});
    } else {
      graph.bind({"circulation", "compliance_scale"}, Signal::constant(*alpha, "1"));
    }
    graph.connect({{"treatment", "pressure_offset"}, {"circulation", "pressure_offset"}, WireMode::sample_hold});
    graph.bind({"circulation", "abp"}, abp);
  }

  ScenarioResult result;
  result.label = cfg.label;
  result.series = compose(graph, horizon_s, cfg.solver);
  result.series.erase("treatment");

  std::map<std::string, MetricValue> m;
  m["age_years"] = profile.age_years;
  m["baseline_glucose_mgdl"] = profile.baseline_glucose;
  m["heparin_0_UmL"] = profile.heparin_0;
  m["vitamin_D_ngmL"] = profile.vitamin_D;
  m["alpha_met"] = alpha;
  if (cfg.enabled("diabetes")) {
    const auto& s = result.series.at("diabetes");
    m["insulin_function"] = dp.phi;
    m["glucose_peak_mgdl"] = meal_windows.empty() ? summarize(s, "G", WireMode::max)
                                                  : summarize(s, "G", WireMode::max, meal_windows);
    m["glucose_mean_mgdl"] = summarize(s, "G", WireMode::mean);
  }
  if (cfg.enabled("pk")) {
    m["drug_peak_mgL"] = summarize(result.series.at("pk"), "drug", WireMode::max);
    const int doses = pk::dose_count(pkp, cfg.horizon_days);
    auto trough = [&](int day) -> MetricValue {
      if (pkp.dose_mg == 0.0 || pkp.doses_per_day == 0.0) return 0.0;
      if (day > doses) return std::nullopt;
      return pk::drug_concentration(pkp, day, pkp.tau_h);
    };
    m["drug_trough_day1_mgL"] = trough(1);
    m["drug_trough_day5_mgL"] = trough(5);
  }
  if (cfg.enabled("ras")) {
    const auto& s = result.series.at("ras");
    m["angII_final_pmolL"] = summarize(s, "ANGII", WireMode::last);
    m["at1r_final_pmolL"] = summarize(s, "AT1R", WireMode::last);
    m["k_ace2_final_per_h"] = summarize(s, "k_ACE2", WireMode::last);
  }
  double ir_steady = 0.0;
  if (cfg.enabled("coupling")) {
    const auto& s = result.series.at("coupling");
    ir_steady = summarize(s, "IR", WireMode::mean, last_day(horizon_s));
    m["ir_steady"] = ir_steady;
    m["ir_final"] = summarize(s, "IR", WireMode::last);
  }
  if (alpha) m["compliance_scale"] = coupling::compliance_scale(*alpha, ir_steady, P.coupling);
  if (cfg.enabled("circulation")) {
    const auto& s = result.series.at("circulation");
    const double from = cfg.discard_beats * period;
    m["pressure_offset_mmHg"] = s.column("pressure_offset")[0];
    for (const auto& v : kReportedVessels) {
      const auto pm = circulation::pressure_metrics(s, v, from);
      m["mean_" + v + "_mmHg"] = pm.mean;
      m["sd_" + v + "_mmHg"] = pm.sd;
      m["pulse_" + v + "_mmHg"] = pm.max - pm.min;
    }
    m["baro_mean_Hz"] = summarize(s, "n_br", WireMode::mean, {{from, circ_horizon}});
  }
  for (const auto& key : metric_keys()) {
    auto it = m.find(key);
    result.metrics.emplace_back(key, it == m.end() ? MetricValue{} : it->second);
  }

  if (cfg.refresh_daily && cfg.enabled("circulation") && cfg.enabled("coupling")) {
    // One cardiac run per simulated day, each with that day's mean inflammation.
    const auto& ir = result.series.at("coupling");
    const int days = static_cast<int>(std::ceil(cfg.horizon_days - 1e-12));
    const double offset0 = m["pressure_offset_mmHg"].value_or(0.0);
    for (int d = 1; d <= days; ++d) {
      const double from_s = (d - 1) * kDay;
      const double to_s = std::min(d * kDay, horizon_s);
      const double day_ir = summarize(ir, "IR", WireMode::mean, {{from_s, to_s}});
      const double scale = coupling::compliance_scale(*alpha, day_ir, P.coupling);
      auto run = circulation::run_circulation(scale, offset0, cfg.cardiac_beats, cfg.discard_beats, cp, cfg.solver, abp);
      const auto pc = circulation::pressure_metrics(run.series, "pc", run.transient_s);
      result.metrics.emplace_back("mean_pc_day" + std::to_string(d) + "_mmHg", pc.mean);
      result.metrics.emplace_back("sd_pc_day" + std::to_string(d) + "_mmHg", pc.sd);
      result.series.emplace("circulation_day" + std::to_string(d), std::move(run.series));
    }
  }
  result.warnings = capture.messages();
  return result;
}

std::vector<ScenarioResult> run_cohort(const std::vector<ScenarioConfig>& cohort, int jobs) {
  std::set<std::string> labels;
  for (const auto& c : cohort) {
    if (!labels.insert(c.label).second) throw ConfigError("label", "duplicate scenario label '" + c.label + "'");
  }
  std::vector<ScenarioResult> results(cohort.size());
  auto run_one = [&](std::size_t i) {
    try {
      results[i] = run_scenario(cohort[i]);
    } catch (const std::exception& e) {
      results[i] = ScenarioResult{};
      results[i].label = cohort[i].label;
      results[i].error = e.what();
    }
  };
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(cohort.size(), 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < cohort.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cohort.size(); i = next++) run_one(i);
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> split_numbers(const std::string& item, char sep, const std::string& field, int line) {
  std::vector<double> out;
  std::stringstream in(item);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(io::parse_number(part, field, line));
  return out;
}

int parse_count(const std::string& text, const std::string& field, int line) {
  const double v = io::parse_number(text, field, line);
  if (v != std::floor(v) || std::abs(v) > 1e6) throw ConfigError(field, "must be an integer", line);
  return static_cast<int>(v);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  auto kvs = io::parse_key_values(text);
  ScenarioConfig cfg;
  auto base = std::find_if(kvs.begin(), kvs.end(), [](const auto& kv) { return kv.key == "builtin"; });
  if (base != kvs.end()) {
    try {
      cfg = builtin(base->value);
    } catch (const ConfigError& e) {
      throw ConfigError("builtin", e.what(), base->line);
    }
    kvs.erase(base);
  }
  ParameterSet overrides;
  auto& p = cfg.profile;
  for (const auto& [key, value, line] : kvs) {
    auto num = [&] { return io::parse_number(value, key, line); };
    auto flag = [&] { return io::parse_bool(value, key, line); };
    if (key == "label") {
      cfg.label = value;
    } else if (key == "age") {
      if (value == "-" || value == "none") {
        p.age_years.reset();
      } else {
        p.age_years = num();
      }
    } else if (key == "baseline_glucose") {
      p.baseline_glucose = num();
    } else if (key == "abp") {
      p.abp_source = value;
      if (value != "builtin" && std::filesystem::path(value).is_relative()) {
        p.abp_source = (std::filesystem::path(origin).parent_path() / value).string();
      }
    } else if (key == "vitamin_D") {
      p.vitamin_D = num();
    } else if (key == "infected") {
      p.infected = flag();
    } else if (key == "infection_onset_h") {
      p.infection_onset_h = num();
    } else if (key == "renal_impaired") {
      p.renal_impaired = flag();
    } else if (key == "acei") {
      p.acei_enabled = flag();
    } else if (key == "acei_dose") {
      p.acei_dose = num();
    } else if (key == "doses_per_day") {
      p.doses_per_day = num();
    } else if (key == "heparin_0") {
      p.heparin_0 = num();
    } else if (key == "meals") {
      p.lifestyle.meals.clear();
      if (value != "none") {
        for (const auto& item : split_list(value)) {
          const auto v = split_numbers(item, ':', key, line);
          if (v.size() != 3) throw ConfigError(key, "meal must be time:load:serving", line);
          p.lifestyle.meals.push_back({v[0], v[1], v[2]});
        }
      }
    } else if (key == "workouts") {
      p.lifestyle.workouts.clear();
      if (value != "none") {
        for (const auto& item : split_list(value)) {
          const auto v = split_numbers(item, ':', key, line);
          if (v.size() != 2) throw ConfigError(key, "workout must be time:kcal", line);
          p.lifestyle.workouts.push_back({v[0], v[1]});
        }
      }
    } else if (key == "delta_meal") {
      p.lifestyle.delta_meal = num();
    } else if (key == "delta_workout") {
      p.lifestyle.delta_workout = num();
    } else if (key == "horizon_days") {
      cfg.horizon_days = num();
    } else if (key == "cardiac_beats") {
      cfg.cardiac_beats = parse_count(value, key, line);
    } else if (key == "discard_beats") {
      cfg.discard_beats = parse_count(value, key, line);
    } else if (key == "modules") {
      cfg.enabled_modules.clear();
      for (const auto& mod : split_list(value)) {
        if (std::find(kAllStages.begin(), kAllStages.end(), mod) == kAllStages.end()) {
          throw ConfigError(key, "unknown module '" + mod + "'", line);
        }
        cfg.enabled_modules.insert(mod);
      }
    } else if (key == "refresh_daily") {
      cfg.refresh_daily = flag();
    } else if (key == "rtol") {
      cfg.solver.rtol = num();
    } else if (key == "atol") {
      cfg.solver.atol = num();
    } else if (key == "method") {
      try {
        cfg.solver.method = parse_method(value);
      } catch (const ConfigError& e) {
        throw ConfigError(key, e.what(), line);
      }
    } else if (key.rfind("param.", 0) == 0) {
      const std::string name = key.substr(6);
      if (!cfg.params.to_parameter_set().contains(name)) throw ConfigError(key, "unknown parameter", line);
      overrides.define(name, num(), "", Provenance::user);
    } else {
      throw ConfigError(key, "unknown key", line);
    }
  }
  cfg.params.apply(overrides);
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    // Report the line of the offending key when it came from this file.
    for (const auto& kv : kvs) {
      if (kv.key == e.field()) throw ConfigError(e.field(), e.what(), kv.line);
    }
    throw;
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(io::read_file(path), path); }

std::vector<ScenarioConfig> load_manifest(const std::string& path) {
  const std::string text = io::read_file(path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::vector<ScenarioConfig> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::filesystem::path file = line.substr(b, e - b + 1);
    if (file.is_relative()) file = dir / file;
    out.push_back(load_scenario(file.string()));
  }
  if (out.empty()) throw ConfigError(path, "manifest lists no scenarios");
  return out;
}

void apply_environment_overrides(ScenarioConfig& cfg) {
  const char* path = std::getenv("COMPATIENT_PARAMS");
  if (path == nullptr || *path == '\0') return;
  ParameterSet overrides;
  const auto known = cfg.params.to_parameter_set();
  for (const auto& kv : io::parse_key_values(io::read_file(path))) {
    if (!known.contains(kv.key)) throw ConfigError(kv.key, std::string("unknown parameter in ") + path, kv.line);
    overrides.define(kv.key, io::parse_number(kv.value, kv.key, kv.line), "", Provenance::user);
  }
  cfg.params.apply(overrides);
}

}  // namespace compatient::scenario
