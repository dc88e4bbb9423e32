#pragma once

#include "compatient/kernel/integrator.hpp"
#include "compatient/kernel/module.hpp"

#include <array>
#include <utility>
#include <vector>

namespace compatient::diabetes {

struct Meal {
  double t_h;       // clock time
  double load;      // glycemic load
  double serving_g;  // carbohydrate serving
};

struct Workout {
  double t_h;
  double kcal;
};

/// Daily schedule repeated every 24 h. An event at clock time t is active on
/// [t, t (1 + delta)).
struct LifestyleSchedule {
  std::vector<Meal> meals;
  std::vector<Workout> workouts;
  double delta_meal = 0.05;
  double delta_workout = 0.05;

  /// Three meals at 8, 12 and 20 h and a 200 kcal workout at 18 h.
  static LifestyleSchedule standard();
  void validate() const;
};

/// Sum of load * serving over meals whose window contains t (hours, any day).
double meal_forcing(const LifestyleSchedule& s, double t_h);
/// Sum of burned kcal over workouts whose window contains t.
double workout_forcing(const LifestyleSchedule& s, double t_h);

/// Glucose (mg/dL), insulin (uU/mL), beta-cell mass (mg), insulin resistance
/// (index). Rates per hour.
struct DiabetesParams {
  double R0 = 36.0;     // mg/dL/h
  double E_G0 = 0.06;   // 1/h
  double S_I = 0.033;   // mL/uU/h
  double i = 1.0;
  double sigma = 1.8;   // uU/mL/h/mg
  double alpha = 2e4;   // (mg/dL)^2
  double k = 18.0;      // 1/h
  double r0 = 0.75;     // mg/h
  double r1 = 0.0105;   // mg/h per mg/dL
  double r2 = 1e-7;     // 1/h per (mg/dL)^2
  double i0 = 0.1;      // 1/h
  double m = 0.01;      // 1/h per cytokine unit
  double q = 0.001;     // 1/h per uU/mL
  double R1 = 0.007;    // mg/dL/h per (load * g)
  double R2 = 0.15;     // mg/dL/h per kcal
  double G_half = 10.0;  // mg/dL
  double phi = 1.0;     // insulin-function factor on S_I and sigma
  double beta_ref = 300.0;  // beta-cell mass used for the fasting calibration

  void validate() const;
};

inline constexpr std::array<ParamField<DiabetesParams>, 17> kParamFields{{
    {"R0", "mg/dL/h", &DiabetesParams::R0},
    {"E_G0", "1/h", &DiabetesParams::E_G0},
    {"S_I", "mL/uU/h", &DiabetesParams::S_I},
    {"i", "1", &DiabetesParams::i},
    {"sigma", "uU/mL/h/mg", &DiabetesParams::sigma},
    {"alpha", "(mg/dL)^2", &DiabetesParams::alpha},
    {"k", "1/h", &DiabetesParams::k},
    {"r0", "mg/h", &DiabetesParams::r0},
    {"r1", "mg/h/(mg/dL)", &DiabetesParams::r1},
    {"r2", "1/h/(mg/dL)^2", &DiabetesParams::r2},
    {"i0", "1/h", &DiabetesParams::i0},
    {"m", "1/h", &DiabetesParams::m},
    {"q", "mL/uU/h", &DiabetesParams::q},
    {"R1", "mg/dL/h", &DiabetesParams::R1},
    {"R2", "mg/dL/h/kcal", &DiabetesParams::R2},
    {"G_half", "mg/dL", &DiabetesParams::G_half},
    {"beta_ref", "mg", &DiabetesParams::beta_ref},
}};

enum Variable : Eigen::Index { G, I, BetaF, IR, kVariableCount };

template <typename Scalar>
void diabetes_rhs(const DiabetesParams& p, const Vector<Scalar>& y, const Scalar& cyt, double meal, double workout,
                  Vector<Scalar>& dy) {
  dy.resize(kVariableCount);
  const Scalar& g = y[G];
  const Scalar g2 = g * g;
  // The workout sink fades out near zero glucose to keep G nonnegative.
  const Scalar sink = g / (g + p.G_half);
  dy[G] = p.R0 - g * (p.E_G0 + p.phi * p.S_I * y[I] / (y[IR] + p.i)) + p.R1 * meal - p.R2 * workout * sink;
  dy[I] = p.phi * p.sigma * y[BetaF] * g2 / (p.alpha + g2) - p.k * y[I];
  dy[BetaF] = -p.r0 + p.r1 * g - p.r2 * g2 * y[BetaF];
  dy[IR] = -p.i0 * y[IR] + p.m * cyt + p.q * y[I];
}

/// Fasting quasi-steady state with beta_f held at beta_ref.
Eigen::VectorXd fasting_state(const DiabetesParams& p, double cyt = 0.0);

/// Returns p with phi chosen so the fasting glucose equals baseline_mgdl.
DiabetesParams calibrate(DiabetesParams p, double baseline_mgdl, double cyt = 0.0);

/// [t_m, t_m (1 + delta) + tail] for the main meals of every day in the
/// horizon, in seconds. Main meals carry at least half the largest meal load.
std::vector<std::pair<double, double>> post_meal_windows(const LifestyleSchedule& s, double horizon_days,
                                                         double tail_h = 2.0);

/// Input: "Cyt" (dimensionless cytokine level). Works in hours.
class DiabetesModule : public ModelModule {
 public:
  DiabetesModule(DiabetesParams params, LifestyleSchedule schedule, std::string id = "diabetes");

  const std::string& id() const override { return id_; }
  const StateLayout& layout() const override { return layout_; }
  Eigen::VectorXd initial_state() const override { return initial_; }
  std::vector<Port> input_ports() const override { return {{"Cyt", "1"}}; }
  std::vector<compatient::Variable> observables() const override {
    return {{"meal_forcing", "1"}, {"workout_forcing", "kcal"}};
  }
  void observe(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
               Eigen::Ref<Eigen::VectorXd> out) const override;
  double seconds_per_time_unit() const override { return 3600.0; }
  void rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const override;
  std::vector<double> breakpoints(double t0, double t1) const override;

  const DiabetesParams& params() const { return params_; }
  const LifestyleSchedule& schedule() const { return schedule_; }
  void set_initial_state(Eigen::VectorXd y) { initial_ = std::move(y); }

 private:
  DiabetesParams params_;
  LifestyleSchedule schedule_;
  std::string id_;
  StateLayout layout_;
  Eigen::VectorXd initial_;
};

struct DiabetesRun {
  TimeSeries series;
  double post_meal_peak = 0.0;  // mg/dL, max over all post-meal windows
  DiabetesParams params;        // calibrated
};

/// Calibrates to baseline glucose, starts from the fasting state and
/// integrates with constant cytokine level `cyt`.
DiabetesRun run_diabetes(double baseline_mgdl, const LifestyleSchedule& schedule, double horizon_days,
                         DiabetesParams params = {}, const IntegratorConfig& cfg = {}, double cyt = 0.0,
                         double dt_h = 0.05);

}  // namespace compatient::diabetes
