// Acceptance suite. Prints one PASS/FAIL line per criterion; exit code is
// the number of failed criteria.
#include "compatient/circulation.hpp"
#include "compatient/cli/cli.hpp"
#include "compatient/coupling.hpp"
#include "compatient/diabetes.hpp"
#include "compatient/io/keyvalue.hpp"
#include "compatient/pk.hpp"
#include "compatient/ras.hpp"
#include "compatient/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

using namespace compatient;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes << " [" << what << "]";
    }
  }
  template <class T>
  void note(const std::string& key, T value) {
    notes << ' ' << key << '=' << std::setprecision(6) << value;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Fixed-step classical RK4 over a module's own right-hand side, sampled on
// grid. Times and step in seconds; the rhs runs in the module's unit.
Eigen::MatrixXd rk4(const ModelModule& m, const std::vector<Signal>& inputs, const std::vector<double>& grid, double h) {
  const Eigen::Index n = m.layout().size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), n);
  Eigen::VectorXd y = m.initial_state();
  std::vector<double> in(inputs.size());
  const double unit = m.seconds_per_time_unit();
  auto f = [&](double t, const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < inputs.size(); ++k) in[k] = inputs[k](t);
    Eigen::VectorXd d;
    m.rhs(t / unit, x, in, d);
    return Eigen::VectorXd(d / unit);
  };
  double t = grid.front();
  out.row(0) = y.transpose();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const int steps = std::max(1, static_cast<int>(std::ceil((grid[i] - t) / h - 1e-9)));
    const double dt = (grid[i] - t) / steps;
    for (int s = 0; s < steps; ++s) {
      const Eigen::VectorXd k1 = f(t, y);
      const Eigen::VectorXd k2 = f(t + dt / 2, y + dt / 2 * k1);
      const Eigen::VectorXd k3 = f(t + dt / 2, y + dt / 2 * k2);
      const Eigen::VectorXd k4 = f(t + dt, y + dt * k3);
      y += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      t += dt;
    }
    t = grid[i];
    out.row(static_cast<Eigen::Index>(i)) = y.transpose();
  }
  return out;
}

// Worst state column of max|a - ref| / max|ref|.
double state_linf(const TimeSeries& adaptive, const Eigen::MatrixXd& ref) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < ref.cols(); ++c) {
    const double scale = ref.col(c).cwiseAbs().maxCoeff();
    if (scale == 0.0) continue;
    worst = std::max(worst, (adaptive.values().col(c) - ref.col(c)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

double metric(const scenario::ScenarioResult& r, const std::string& key) {
  const auto v = r.metric(key);
  return v ? *v : std::nan("");
}

// --- 1 ---------------------------------------------------------------------

double single_dose(const pk::PkParams& p, double t) {
  if (t < 0) return 0.0;
  const double ke = p.elimination_rate();
  return p.dose_mg * p.F * p.k_a / (p.V_L * (p.k_a - ke)) * (std::exp(-ke * t) - std::exp(-p.k_a * t));
}

void ac1(Check& c) {
  const auto start = Clock::now();
  double worst = 0.0;
  for (bool renal : {false, true}) {
    pk::PkParams p;
    p.dose_mg = 5.0;
    p.renal_impaired = renal;
    for (int n = 1; n <= 5; ++n) {
      for (double t = 0.05; t < p.tau_h; t += 0.37) {
        double ref = 0.0;
        for (int j = 0; j < n; ++j) ref += single_dose(p, t + j * p.tau_h);
        worst = std::max(worst, std::abs(pk::drug_concentration(p, n, t) - ref) / ref);
      }
    }
  }
  c.note("superposition_rel_err", worst);
  c.expect(worst <= 1e-9, "closed form vs superposition above 1e-9");

  pk::PkParams p;
  p.dose_mg = 5.0;
  p.renal_impaired = true;
  double previous = 0.0;
  c.notes << " renal_troughs=";
  for (int day = 1; day <= 5; ++day) {
    const double trough = pk::drug_concentration(p, day, p.tau_h);
    c.notes << std::setprecision(4) << trough << (day < 5 ? "," : "");
    c.expect(trough > previous, "renal trough not increasing on day " + std::to_string(day));
    previous = trough;
  }
  const double elapsed = seconds_since(start);
  c.note("runtime_s", elapsed);
  c.expect(elapsed < 1.0, "runtime");
}

// --- 2 ---------------------------------------------------------------------

void ac2(Check& c) {
  const auto start = Clock::now();
  const ras::RasParams p;
  const IntegratorConfig cfg;
  double worst = 0.0;
  for (double G : {110.0, 185.0}) {
    for (double drug : {0.0, 0.02}) {
      const Eigen::VectorXd eq = ras::equilibrium(p, G, drug);
      ras::RasModule m(p);
      Eigen::VectorXd y0 = Eigen::VectorXd::Constant(ras::kSpeciesCount, 1.0);
      y0[ras::K_ACE2] = p.k_ACE2_0;
      m.set_initial_state(y0);
      const std::vector<Signal> inputs{Signal::constant(G, "mg/dL"), Signal::constant(drug, "mg/L")};
      const std::vector<double> grid{0.0, 300.0 * 3600.0};
      const TimeSeries ts = integrate(m, 0.0, grid.back(), inputs, cfg, grid);
      for (Eigen::Index i = 0; i < ras::kSpeciesCount; ++i)
        worst = std::max(worst, std::abs(ts.values()(1, i) - eq[i]) / std::abs(eq[i]));
      c.expect(eq[ras::AT1R] == ras::at1r_equilibrium(p, G, eq[ras::ANGII]) ||
                   std::abs(eq[ras::AT1R] / ras::at1r_equilibrium(p, G, eq[ras::ANGII]) - 1.0) < 1e-12,
               "AT1R equilibrium formula");
    }
  }
  c.note("fixed_point_rel_err", worst);
  c.note("band", 10 * cfg.rtol);
  c.expect(worst <= 10 * cfg.rtol, "fixed point vs long integration outside rtol*10");

  const TimeSeries ts = ras::run_ras(180.0, Signal::constant(0.05, "mg/L"), {}, 2.0);
  const Eigen::VectorXd k = ts.column("k_ACE2");
  c.expect(k.maxCoeff() == k.minCoeff() && k[0] == p.k_ACE2_0, "k_ACE2 moved while uninfected");
  const double elapsed = seconds_since(start);
  c.note("runtime_s", elapsed);
  c.expect(elapsed < 5.0, "runtime");
}

// --- 3 ---------------------------------------------------------------------

void ac3(Check& c) {
  const auto start = Clock::now();
  const auto s = diabetes::LifestyleSchedule::standard();
  const std::vector<std::array<double, 3>> meals{{8, 4, 50}, {12, 42, 100}, {20, 42, 100}};
  bool schedule_ok = s.meals.size() == 3 && s.workouts.size() == 1;
  for (std::size_t i = 0; schedule_ok && i < 3; ++i)
    schedule_ok = s.meals[i].t_h == meals[i][0] && s.meals[i].load == meals[i][1] &&
                  s.meals[i].serving_g == meals[i][2];
  schedule_ok = schedule_ok && s.workouts[0].t_h == 18.0 && s.workouts[0].kcal == 200.0;
  c.expect(schedule_ok, "standard schedule differs from the table");

  const auto healthy = diabetes::run_diabetes(100.0, s, 5.0);
  const auto diabetic = diabetes::run_diabetes(170.0, s, 5.0);
  c.note("healthy_peak", healthy.post_meal_peak);
  c.note("diabetic_peak", diabetic.post_meal_peak);
  c.expect(healthy.post_meal_peak >= 108.0 && healthy.post_meal_peak <= 125.0, "healthy peak outside [108, 125]");
  c.expect(diabetic.post_meal_peak >= 180.0 && diabetic.post_meal_peak <= 200.0, "diabetic peak outside [180, 200]");
  const double elapsed = seconds_since(start);
  c.note("runtime_s", elapsed);
  c.expect(elapsed < 10.0, "runtime");
}

// --- 4 ---------------------------------------------------------------------

void ac4(Check& c) {
  const coupling::CouplingParams p;
  bool identity = true;
  for (double C : {0.01, 0.37, 1.0, 3.0, 42.5}) identity = identity && coupling::reduced_compliance(C, 1.0, 0.0, p) == C;
  c.expect(identity, "identity case not exact");

  double worst = 0.0;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double dk = 10 * u(rng), drug = 0.2 * u(rng), G = 80 + 150 * u(rng);
    const double whole = coupling::ir_steady_state(p, dk, drug, G);
    const double parts = coupling::ir_steady_state(p, dk, 0, 0) + coupling::ir_steady_state(p, 0, drug, 0) +
                         coupling::ir_steady_state(p, 0, 0, G);
    worst = std::max(worst, std::abs(whole - parts) / whole);
  }
  c.note("additivity_rel_err", worst);
  c.expect(worst <= 1e-12, "steady state not additive");

  const auto a = circulation::run_circulation(0.9, 0.0, 30);
  const auto b = circulation::run_circulation(0.9, 3.7, 30);
  bool sd_equal = true;
  for (const auto& v : scenario::kReportedVessels) {
    sd_equal = sd_equal && circulation::pressure_metrics(a.series, v, a.transient_s).sd ==
                               circulation::pressure_metrics(b.series, v, b.transient_s).sd;
  }
  c.expect(sd_equal, "offset changed a pressure sd");
}

// --- 5 ---------------------------------------------------------------------

double pulse(const circulation::CirculationRun& r, const std::string& id) {
  const auto m = circulation::pressure_metrics(r.series, id, r.transient_s);
  return m.max - m.min;
}

void ac5(Check& c) {
  const auto start = Clock::now();
  const auto params = circulation::CirculationParams::defaults();
  const IntegratorConfig cfg = circulation::default_config({});
  const auto run = circulation::run_circulation(1.0, 0.0, 30, 10, params, cfg);
  const double elapsed = seconds_since(start);
  const TimeSeries& ts = run.series;

  double min_flow = 0.0;
  for (const auto& v : params.valves) min_flow = std::min(min_flow, ts.column("q_" + v.id).minCoeff());
  c.note("min_valve_flow", min_flow);
  c.expect(min_flow >= 0.0, "valve backflow");

  // Beat-to-beat change of every compartment pressure after the transient.
  const double T = params.period_s;
  double worst = 0.0;
  std::vector<std::string> ids;
  for (const auto& v : params.vessels) ids.push_back(v.id);
  for (const auto& ch : params.chambers) ids.push_back(ch.id);
  for (const auto& id : ids) {
    const Eigen::VectorXd p = ts.column("P_" + id);
    for (Eigen::Index i = 0; i < ts.samples(); ++i) {
      const double t = ts.time()[i];
      if (t < run.transient_s + T - 1e-9) continue;
      const Eigen::Index j = i - 200;
      if (std::abs(ts.time()[j] - (t - T)) > 1e-9) {
        c.expect(false, "sampling not aligned with beats");
        break;
      }
      worst = std::max(worst, std::abs(p[i] - p[j]) / std::max(1.0, p.cwiseAbs().maxCoeff()));
    }
  }
  c.note("periodicity_linf", worst);
  c.expect(worst <= 0.01, "not periodic within 1%");

  const circulation::CirculationModule m(params);
  const Eigen::Index nv = m.compartments();
  double leak = 0.0;
  const auto abp = circulation::builtin_abp(T);
  for (Eigen::Index i = 0; i < ts.samples(); i += 7) {
    const Eigen::VectorXd y = ts.values().row(i).head(m.layout().size()).transpose();
    const std::vector<double> in{1.0, abp(ts.time()[i]), 0.0};
    Eigen::VectorXd dy;
    m.rhs(ts.time()[i], y, in, dy);
    leak = std::max(leak, std::abs(dy.head(nv).sum()));
  }
  c.note("max_sum_dVdt", leak);
  c.expect(leak <= cfg.atol, "volume not conserved");

  auto stiff = params;
  for (auto& v : stiff.vessels)
    if (v.id == "pc") v.C *= 0.5;
  const auto halved = circulation::run_circulation(1.0, 0.0, 30, 10, stiff, cfg);
  c.note("pc_pulse", pulse(run, "pc"));
  c.note("pc_pulse_halved", pulse(halved, "pc"));
  c.expect(pulse(halved, "pc") > pulse(run, "pc"), "halving pc compliance did not raise its pulse pressure");
  c.note("runtime_s", elapsed);
  c.expect(elapsed <= 30.0, "runtime");
}

// --- 6 ---------------------------------------------------------------------

void ac6(Check& c) {
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto start = Clock::now();
  const auto results = scenario::run_cohort(scenario::builtin_cohort(), static_cast<int>(jobs));
  const double elapsed = seconds_since(start);
  std::map<std::string, const scenario::ScenarioResult*> by;
  for (const auto& r : results) {
    c.expect(r.ok(), r.label + " failed: " + r.error);
    by[r.label] = &r;
  }
  if (!c.ok) return;
  auto m = [&](const std::string& label, const std::string& key) { return metric(*by.at(label), key); };

  const double ir_h = m("H", "ir_steady"), ir_v = m("V", "ir_steady"), ir_cv = m("C+V", "ir_steady"),
               ir_cvt = m("C+V+T", "ir_steady");
  c.note("IR_H", ir_h);
  c.note("IR_V", ir_v);
  c.note("IR_CV", ir_cv);
  c.note("IR_CVT", ir_cvt);
  c.expect(ir_cv > ir_v && ir_v > ir_h, "IR ordering C+V > V > H");
  c.expect(ir_cvt < ir_cv, "IR C+V+T < C+V");

  for (const std::string v : {"pap", "pc"}) {
    c.expect(m("C+V", "mean_" + v + "_mmHg") > m("H", "mean_" + v + "_mmHg"), "mean " + v + " C+V > H");
    c.expect(m("C+V", "sd_" + v + "_mmHg") > m("H", "sd_" + v + "_mmHg"), "sd " + v + " C+V > H");
  }

  // Pulmonary pressure is checked at both the arterial and the capillary compartment.
  const std::vector<std::string> lung{"pap", "pc"};
  std::map<std::string, double> previous;
  for (double age : {20.0, 45.0, 70.0}) {
    const auto r = scenario::run_scenario(scenario::with_profile_value(scenario::builtin("C+V"), "age", age));
    c.expect(r.ok(), "age sweep failed: " + r.error);
    for (const auto& v : lung) {
      const double sd = metric(r, "sd_" + v + "_mmHg");
      c.note("sd_" + v + "_age" + std::to_string(static_cast<int>(age)), sd);
      c.expect(sd >= previous[v], "sd " + v + " decreased with age");
      previous[v] = sd;
    }
  }

  for (const auto& v : lung) {
    const double mean_t = m("C+V+T", "mean_" + v + "_mmHg"), mean_3t = m("C+V+3T", "mean_" + v + "_mmHg");
    const double sd_t = m("C+V+T", "sd_" + v + "_mmHg"), sd_3t = m("C+V+3T", "sd_" + v + "_mmHg");
    const double drop = (mean_t - mean_3t) / mean_t;
    const double sd_change = std::abs(sd_3t - sd_t) / sd_t;
    c.note(v + "_mean_drop_3T", drop);
    c.note(v + "_sd_change_3T", sd_change);
    c.expect(drop >= 0.05 && drop <= 0.10, "C+V+3T mean " + v + " drop outside 5-10%");
    c.expect(sd_change <= 0.02, "C+V+3T sd " + v + " changed by more than 2%");
  }
  c.note("cohort_runtime_s", elapsed);
  c.expect(elapsed <= 180.0, "cohort runtime");
}

// --- 7 ---------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_file(e.path().string());
  return files;
}

void ac7(Check& c) {
  const fs::path base = fs::temp_directory_path() / "compatient_acceptance_ac7";
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> bundles;
  for (const char* name : {"first", "second"}) {
    std::ostringstream out, err;
    const int code = cli::run({"compatient", "cohort", "--out", (base / name).string(), "--seedless"}, out, err);
    c.expect(code == 0, std::string("cohort run exited ") + std::to_string(code) + ": " + err.str());
    if (code != 0) return;
    bundles.push_back(snapshot(base / name));
  }
  c.note("files", bundles[0].size());
  c.expect(!bundles[0].empty(), "empty bundle");
  c.expect(bundles[0] == bundles[1], "bundles differ");
  fs::remove_all(base);
}

// --- 8 ---------------------------------------------------------------------

// Gut amount and plasma concentration with a bolus into the gut at every dose.
double pk_oracle_linf(const pk::PkParams& p, double horizon_h, double h) {
  const int doses = pk::dose_count(p, horizon_h / 24.0);
  double gut = 0.0, conc = 0.0, worst = 0.0, scale = 0.0;
  std::vector<std::pair<double, double>> samples;
  const double ke = p.elimination_rate();
  auto f = [&](double g, double x) { return std::pair{-p.k_a * g, p.F * p.k_a * g / p.V_L - ke * x}; };
  const int steps = static_cast<int>(std::lround(horizon_h / h));
  int given = 0;
  for (int s = 0; s <= steps; ++s) {
    const double t = s * h;
    while (given < doses && given * p.tau_h <= t + 1e-9) {
      gut += p.dose_mg;
      ++given;
    }
    const double exact = pk::drug_at(p, t, doses);
    worst = std::max(worst, std::abs(conc - exact));
    scale = std::max(scale, std::abs(exact));
    const auto [a1, b1] = f(gut, conc);
    const auto [a2, b2] = f(gut + h / 2 * a1, conc + h / 2 * b1);
    const auto [a3, b3] = f(gut + h / 2 * a2, conc + h / 2 * b2);
    const auto [a4, b4] = f(gut + h * a3, conc + h * b3);
    gut += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4);
    conc += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4);
  }
  return worst / scale;
}

void ac8(Check& c) {
  const auto start = Clock::now();
  const double day = 86400.0;

  pk::PkParams p;
  p.dose_mg = 5.0;
  p.tau_h = 8.0;
  p.renal_impaired = true;
  const double e_pk = pk_oracle_linf(p, 24.0, 0.001);
  c.note("pk", e_pk);
  c.expect(e_pk < 0.005, "pk");

  {
    ras::RasModule m(ras::RasParams{}, {true, 0.0});
    const Signal drug([](double t) { return 0.1 * std::exp(-std::fmod(t / 3600.0, 24.0) * 0.15); }, "mg/L");
    const std::vector<Signal> in{Signal::constant(185.0, "mg/dL"), drug};
    const auto grid = uniform_grid(0.0, day, 360.0);
    const double e = state_linf(integrate(m, 0.0, day, in, {}, grid), rk4(m, in, grid, 0.1));
    c.note("ras", e);
    c.expect(e < 0.005, "ras");
  }
  {
    diabetes::DiabetesModule m(diabetes::calibrate({}, 170.0), diabetes::LifestyleSchedule::standard());
    const std::vector<Signal> in{Signal::constant(2.0, "1")};
    const auto grid = uniform_grid(0.0, day, 180.0);
    const double e = state_linf(integrate(m, 0.0, day, in, {}, grid), rk4(m, in, grid, 1.0));
    c.note("diabetes", e);
    c.expect(e < 0.005, "diabetes");
  }
  {
    coupling::InflammationModule m;
    const std::vector<Signal> in{Signal([](double t) { return 3.0 * (1.0 - std::exp(-t / 36000.0)); }, "1/h"),
                                 Signal([](double t) { return 0.1 * std::exp(-std::fmod(t, 86400.0) / 20000.0); }, "mg/L"),
                                 Signal::constant(185.0, "mg/dL")};
    const auto grid = uniform_grid(0.0, day, 360.0);
    const double e = state_linf(integrate(m, 0.0, day, in, {}, grid), rk4(m, in, grid, 1.0));
    c.note("coupling", e);
    c.expect(e < 0.005, "coupling");
  }
  {
    // Cardiac stage: its 30-beat run rather than a day.
    const circulation::CirculationModule m;
    const double T = m.params().period_s;
    const std::vector<Signal> in{Signal::constant(1.0, "1"), circulation::builtin_abp(T), Signal::constant(0.0, "mmHg")};
    const double end = 30 * T;
    const auto grid = uniform_grid(0.0, end, T / 200);
    const double e = state_linf(integrate(m, 0.0, end, in, circulation::default_config({}), grid), rk4(m, in, grid, 5e-5));
    c.note("circulation", e);
    c.expect(e < 0.005, "circulation");
  }
  c.note("runtime_s", seconds_since(start));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"AC1 pk superposition and renal troughs", ac1},
      {"AC2 ras fixed points and frozen ACE2", ac2},
      {"AC3 glucose calibration bands", ac3},
      {"AC4 coupling arithmetic", ac4},
      {"AC5 circulation properties", ac5},
      {"AC6 cohort monotonicity", ac6},
      {"AC7 cohort determinism", ac7},
      {"AC8 adaptive vs rk4 oracle", ac8},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    const auto start = Clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(2)
              << seconds_since(start) << " s)" << std::defaultfloat << " |" << c.notes.str() << std::endl;
    failed += c.ok ? 0 : 1;
  }
  return failed;
}
