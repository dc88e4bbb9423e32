#include "compatient/errors.hpp"
#include "compatient/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace compatient::scenario {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("compatient_scenario_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& file, const std::string& text) {
  std::ofstream f(file);
  f << text;
}

TEST(Cohort, EightScenarios) {
  const auto cohort = builtin_cohort();
  ASSERT_EQ(cohort.size(), 8u);
  const std::vector<std::string> labels{"H", "D", "R", "C+T", "V", "C+V", "C+V+T", "C+V+3T"};
  for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(cohort[i].label, labels[i]);
  for (const auto& c : cohort) EXPECT_NO_THROW(c.validate()) << c.label;
}

TEST(Cohort, HealthyHasNoFlags) {
  const auto& p = builtin("H").profile;
  EXPECT_FALSE(p.infected);
  EXPECT_FALSE(p.renal_impaired);
  EXPECT_FALSE(p.acei_enabled);
  EXPECT_EQ(p.heparin_0, 0.0);
  EXPECT_LE(p.baseline_glucose, 125.0);
}

TEST(Cohort, FullyTreatedRow) {
  const auto& p = builtin("C+V+3T").profile;
  EXPECT_TRUE(p.acei_enabled);
  EXPECT_GT(p.acei_dose, 0.0);
  EXPECT_TRUE(p.infected);
  EXPECT_TRUE(p.renal_impaired);
  EXPECT_GE(p.baseline_glucose, 150.0);
  EXPECT_GT(p.heparin_0, 0.0);
  EXPECT_GT(p.vitamin_D, builtin("C+V+T").profile.vitamin_D);
}

TEST(Cohort, UnknownBuiltin) { EXPECT_THROW(builtin("Z"), ConfigError); }

TEST(Cohort, DuplicateLabelsRejected) {
  EXPECT_THROW(run_cohort({builtin("D"), builtin("D")}), ConfigError);
}

TEST(Cohort, FailuresStayIsolated) {
  ScenarioConfig broken = builtin("D");
  broken.label = "broken";
  broken.params.diabetes.k = -1.0;
  const auto results = run_cohort({builtin("D"), broken});
  ASSERT_EQ(results.size(), 2u);
  EXPECT_TRUE(results[0].ok());
  EXPECT_FALSE(results[1].ok());
  EXPECT_EQ(results[1].label, "broken");
}

TEST(Scenario, DiabeticRowWithoutCirculation) {
  const ScenarioResult r = run_scenario(builtin("D"));
  ASSERT_TRUE(r.ok()) << r.error;
  const double peak = *r.metric("glucose_peak_mgdl");
  EXPECT_GE(peak, 180.0);
  EXPECT_LE(peak, 200.0);
  EXPECT_FALSE(r.metric("mean_pc_mmHg").has_value());
  EXPECT_EQ(r.series.count("circulation"), 0u);
  ASSERT_EQ(r.metrics.size(), metric_keys().size());
  for (std::size_t i = 0; i < r.metrics.size(); ++i) EXPECT_EQ(r.metrics[i].first, metric_keys()[i]);
}

TEST(Scenario, RepeatedRunsAreBitIdentical) {
  const ScenarioResult a = run_scenario(builtin("R"));
  const ScenarioResult b = run_scenario(builtin("R"));
  ASSERT_TRUE(a.ok() && b.ok());
  ASSERT_EQ(a.series.size(), b.series.size());
  for (const auto& [id, ts] : a.series) EXPECT_TRUE(ts == b.series.at(id)) << id;
  EXPECT_EQ(a.metrics, b.metrics);
}

TEST(Scenario, ParallelMatchesSerial) {
  const std::vector<ScenarioConfig> rows{builtin("D"), builtin("R")};
  const auto serial = run_cohort(rows, 1);
  const auto parallel = run_cohort(rows, 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(serial[i].label, parallel[i].label);
    EXPECT_EQ(serial[i].metrics, parallel[i].metrics);
  }
}

TEST(Scenario, CirculationNeedsAge) {
  ScenarioConfig c = builtin("C+V");
  c.profile.age_years.reset();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Scenario, ProfileSweepRelabels) {
  const ScenarioConfig c = with_profile_value(builtin("C+V"), "age", 45.0);
  EXPECT_EQ(*c.profile.age_years, 45.0);
  EXPECT_EQ(c.label, "C+V@age=45");
  EXPECT_THROW(with_profile_value(builtin("C+V"), "height", 1.0), ConfigError);
}

TEST(ScenarioFile, ParsesProfileAndOverrides) {
  const ScenarioConfig c = parse_scenario(
      "# comment\n"
      "builtin = C+V\n"
      "label = mine\n"
      "age = 55\n"
      "acei = true\n"
      "acei_dose = 2.5\n"
      "meals = 8:4:50, 13:42:100\n"
      "workouts = none\n"
      "modules = diabetes, pk, ras, coupling\n"
      "param.ras.IC50 = 0.03\n"
      "rtol = 1e-7\n");
  EXPECT_EQ(c.label, "mine");
  EXPECT_EQ(*c.profile.age_years, 55.0);
  EXPECT_TRUE(c.profile.infected);  // from the base row
  EXPECT_TRUE(c.profile.acei_enabled);
  EXPECT_EQ(c.profile.acei_dose, 2.5);
  ASSERT_EQ(c.profile.lifestyle.meals.size(), 2u);
  EXPECT_EQ(c.profile.lifestyle.meals[1].t_h, 13.0);
  EXPECT_TRUE(c.profile.lifestyle.workouts.empty());
  EXPECT_FALSE(c.enabled("circulation"));
  EXPECT_EQ(c.params.ras.IC50, 0.03);
  EXPECT_EQ(c.solver.rtol, 1e-7);
}

TEST(ScenarioFile, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("label = x\nage = old\n"), 2);
  EXPECT_EQ(line_of("label = x\n\ncolour = red\n"), 3);
  EXPECT_EQ(line_of("age = 40\nage = 41\n"), 2);
  EXPECT_EQ(line_of("label = x\nparam.ras.nope = 1\n"), 2);
  EXPECT_EQ(line_of("modules = ras, kidney\n"), 1);
  EXPECT_EQ(line_of("builtin = nobody\n"), 1);
  EXPECT_EQ(line_of("method = lsoda\n"), 1);
  EXPECT_EQ(line_of("label = x\nmeals = 8:4\n"), 2);
}

TEST(ScenarioFile, ManifestResolvesRelativePaths) {
  const fs::path dir = scratch("manifest");
  write(dir / "a.scn", "builtin = D\nlabel = a\n");
  write(dir / "b.scn", "builtin = R\nlabel = b\n");
  write(dir / "cohort.txt", "# two rows\na.scn\n\nb.scn\n");
  const auto rows = load_manifest((dir / "cohort.txt").string());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].label, "b");
  write(dir / "empty.txt", "# nothing\n");
  EXPECT_THROW(load_manifest((dir / "empty.txt").string()), ConfigError);
  fs::remove_all(dir);
}

TEST(ScenarioFile, ShippedExamplesLoad) {
  const auto rows = load_manifest(std::string(COMPATIENT_DATA_DIR) + "/cohort.txt");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].label, "C+V-lowdose");
  EXPECT_EQ(rows[0].profile.acei_dose, 2.5);
  EXPECT_NE(rows[1].profile.abp_source, "builtin");
  for (const auto& r : rows) EXPECT_NO_THROW(r.validate());
}

TEST(ScenarioFile, EnvironmentOverrides) {
  const fs::path dir = scratch("env");
  write(dir / "params.txt", "coupling.k_G = 0.005\n");
  ::setenv("COMPATIENT_PARAMS", (dir / "params.txt").c_str(), 1);
  ScenarioConfig c = builtin("H");
  apply_environment_overrides(c);
  EXPECT_EQ(c.params.coupling.k_G, 0.005);
  write(dir / "params.txt", "coupling.k_X = 1\n");
  EXPECT_THROW(apply_environment_overrides(c), ConfigError);
  ::unsetenv("COMPATIENT_PARAMS");
  fs::remove_all(dir);
}

TEST(Parameters, RoundTripThroughParameterSet) {
  ModelParameters m;
  ParameterSet p = m.to_parameter_set();
  EXPECT_TRUE(p.contains("pk.k_e"));
  EXPECT_TRUE(p.contains("circulation.pc.C"));
  p.set("pk.k_e", 0.25);
  p.set("circulation.pc.C", 2.0);
  m.apply(p);
  EXPECT_EQ(m.pk.k_e, 0.25);
  for (const auto& v : m.circulation.vessels)
    if (v.id == "pc") EXPECT_EQ(v.C, 2.0);
}

// Higher glucose -> more inflammation -> stiffer vessels -> larger pulmonary pulse pressure.
TEST(Chain, GlucoseToPulmonaryPulsePressure) {
  const coupling::CouplingParams p;
  const double alpha = coupling::methylation_factor(70.0, p);
  double previous_pulse = 0.0;
  double previous_ir = 0.0;
  for (double G : {120.0, 190.0}) {
    const double ir = coupling::ir_steady_state(p, 4.0, 0.0, G);
    EXPECT_GT(ir, previous_ir);
    const auto run = circulation::run_circulation(coupling::compliance_scale(alpha, ir, p), 0.0, 20, 10);
    const auto m = circulation::pressure_metrics(run.series, "pap", run.transient_s);
    EXPECT_GT(m.max - m.min, previous_pulse) << G;
    previous_pulse = m.max - m.min;
    previous_ir = ir;
  }
}

}  // namespace
}  // namespace compatient::scenario
