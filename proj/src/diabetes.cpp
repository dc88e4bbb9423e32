#include "compatient/diabetes.hpp"
#include "compatient/errors.hpp"
#include "compatient/kernel/composition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace compatient::diabetes {

LifestyleSchedule LifestyleSchedule::standard() {
  LifestyleSchedule s;
  s.meals = {{8.0, 4.0, 50.0}, {12.0, 42.0, 100.0}, {20.0, 42.0, 100.0}};
  s.workouts = {{18.0, 200.0}};
  return s;
}

void LifestyleSchedule::validate() const {
  for (const auto& m : meals) {
    if (!(m.t_h >= 0.0 && m.t_h < 24.0)) throw ConfigError("meals", "meal time must lie in [0, 24) h");
    if (!(m.load >= 0.0 && m.serving_g >= 0.0)) throw ConfigError("meals", "loads and servings must be >= 0");
  }
  for (const auto& w : workouts) {
    if (!(w.t_h >= 0.0 && w.t_h < 24.0)) throw ConfigError("workouts", "workout time must lie in [0, 24) h");
    if (!(w.kcal >= 0.0)) throw ConfigError("workouts", "burned calories must be >= 0");
  }
  if (!(delta_meal >= 0.0) || !(delta_workout >= 0.0)) throw ConfigError("delta", "window fractions must be >= 0");
}

namespace {

bool in_window(double start_h, double delta, double t_h) {
  const double clock = t_h - 24.0 * std::floor(t_h / 24.0);
  return clock >= start_h && clock < start_h * (1.0 + delta);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, const char* what) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo * fhi > 0.0) throw ConfigError(what, "no root in the search bracket");
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double meal_forcing(const LifestyleSchedule& s, double t_h) {
  double h = 0.0;
  for (const auto& m : s.meals) {
    if (in_window(m.t_h, s.delta_meal, t_h)) h += m.load * m.serving_g;
  }
  return h;
}

double workout_forcing(const LifestyleSchedule& s, double t_h) {
  double h = 0.0;
  for (const auto& w : s.workouts) {
    if (in_window(w.t_h, s.delta_workout, t_h)) h += w.kcal;
  }
  return h;
}

void DiabetesParams::validate() const {
  for (const auto& f : kParamFields) {
    const double v = this->*(f.member);
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("diabetes.") + f.name, "must be finite and >= 0");
  }
  if (!(alpha > 0.0)) throw ConfigError("diabetes.alpha", "must be > 0");
  if (!(i > 0.0)) throw ConfigError("diabetes.i", "must be > 0");
  if (!(phi > 0.0)) throw ConfigError("diabetes.phi", "must be > 0");
}

namespace {

struct Fasting {
  double insulin;
  double resistance;
  double dG;
};

Fasting fasting_balance(const DiabetesParams& p, double g, double cyt) {
  const double insulin = p.phi * p.sigma * p.beta_ref * g * g / ((p.alpha + g * g) * p.k);
  const double resistance = (p.q * insulin + p.m * cyt) / p.i0;
  const double dG = p.R0 - g * (p.E_G0 + p.phi * p.S_I * insulin / (resistance + p.i));
  return {insulin, resistance, dG};
}

}  // namespace

Eigen::VectorXd fasting_state(const DiabetesParams& p, double cyt) {
  const double g = find_root([&](double x) { return fasting_balance(p, x, cyt).dG; }, 1.0, 2000.0, "baseline_glucose");
  const Fasting f = fasting_balance(p, g, cyt);
  Eigen::VectorXd y(kVariableCount);
  y << g, f.insulin, p.beta_ref, f.resistance;
  return y;
}

DiabetesParams calibrate(DiabetesParams p, double baseline_mgdl, double cyt) {
  if (!(baseline_mgdl > 0.0)) throw ConfigError("baseline_glucose", "must be > 0");
  auto excess = [&](double phi) {
    DiabetesParams q = p;
    q.phi = phi;
    return fasting_state(q, cyt)[G] - baseline_mgdl;
  };
  p.phi = find_root(excess, 1e-3, 50.0, "baseline_glucose");
  return p;
}

std::vector<std::pair<double, double>> post_meal_windows(const LifestyleSchedule& s, double horizon_days,
                                                         double tail_h) {
  double largest = 0.0;
  for (const auto& m : s.meals) largest = std::max(largest, m.load * m.serving_g);
  std::vector<std::pair<double, double>> windows;
  const int days = static_cast<int>(std::ceil(horizon_days - 1e-12));
  for (int d = 0; d < days; ++d) {
    for (const auto& m : s.meals) {
      if (largest == 0.0 || m.load * m.serving_g < 0.5 * largest) continue;
      const double from = d * 24.0 + m.t_h;
      const double to = d * 24.0 + m.t_h * (1.0 + s.delta_meal) + tail_h;
      const double end = horizon_days * 24.0;
      if (from < end) windows.emplace_back(from * 3600.0, std::min(to, end) * 3600.0);
    }
  }
  std::sort(windows.begin(), windows.end());
  return windows;
}

DiabetesModule::DiabetesModule(DiabetesParams params, LifestyleSchedule schedule, std::string id)
    : params_(params),
      schedule_(std::move(schedule)),
      id_(std::move(id)),
      layout_({{"G", "mg/dL"}, {"I", "uU/mL"}, {"beta_f", "mg"}, {"I_R", "1"}}) {
  params_.validate();
  schedule_.validate();
  initial_ = fasting_state(params_);
}

void DiabetesModule::rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
                         Eigen::VectorXd& dydt) const {
  diabetes_rhs<double>(params_, y, inputs[0], meal_forcing(schedule_, t), workout_forcing(schedule_, t), dydt);
}

void DiabetesModule::observe(double t, const Eigen::VectorXd&, std::span<const double>,
                             Eigen::Ref<Eigen::VectorXd> out) const {
  out[0] = meal_forcing(schedule_, t);
  out[1] = workout_forcing(schedule_, t);
}

std::vector<double> DiabetesModule::breakpoints(double t0, double t1) const {
  std::vector<double> starts;
  std::vector<double> out;
  for (const auto& m : schedule_.meals) {
    starts.push_back(m.t_h);
    starts.push_back(m.t_h * (1.0 + schedule_.delta_meal));
  }
  for (const auto& w : schedule_.workouts) {
    starts.push_back(w.t_h);
    starts.push_back(w.t_h * (1.0 + schedule_.delta_workout));
  }
  const auto first = static_cast<int>(std::floor(t0 / 24.0));
  const auto last = static_cast<int>(std::ceil(t1 / 24.0));
  for (int d = first; d <= last; ++d) {
    for (double c : starts) {
      const double b = d * 24.0 + c;
      if (b > t0 && b < t1) out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DiabetesRun run_diabetes(double baseline_mgdl, const LifestyleSchedule& schedule, double horizon_days,
                         DiabetesParams params, const IntegratorConfig& cfg, double cyt, double dt_h) {
  DiabetesRun run;
  run.params = calibrate(params, baseline_mgdl, cyt);
  DiabetesModule module(run.params, schedule);
  module.set_initial_state(fasting_state(run.params, cyt));
  const double t1 = horizon_days * 86400.0;
  const std::vector<Signal> inputs{Signal::constant(cyt, "1")};
  const auto grid = uniform_grid(0.0, t1, dt_h * 3600.0);
  run.series = integrate(module, 0.0, t1, inputs, cfg, grid);
  const auto windows = post_meal_windows(schedule, horizon_days);
  run.post_meal_peak = windows.empty() ? summarize(run.series, "G", WireMode::max)
                                       : summarize(run.series, "G", WireMode::max, windows);
  return run;
}

}  // namespace compatient::diabetes
