#include "compatient/diabetes.hpp"
#include "compatient/errors.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace compatient::diabetes {
namespace {

Eigen::VectorXd rhs_at(const DiabetesParams& p, double g, double i, double beta, double ir, double meal = 0.0,
                       double workout = 0.0, double cyt = 0.0) {
  Eigen::VectorXd y(kVariableCount);
  y << g, i, beta, ir;
  Eigen::VectorXd dy;
  diabetes_rhs<double>(p, y, cyt, meal, workout, dy);
  return dy;
}

double day_peak(const TimeSeries& ts, int day) {
  double peak = 0.0;
  const Eigen::VectorXd g = ts.column("G");
  for (Eigen::Index i = 0; i < ts.samples(); ++i) {
    const double t_h = ts.time()[i] / 3600.0;
    if (t_h >= 24.0 * day && t_h < 24.0 * (day + 1)) peak = std::max(peak, g[i]);
  }
  return peak;
}

TEST(Forcing, OutsideWindowsIsZero) {
  const LifestyleSchedule s = LifestyleSchedule::standard();
  for (double t : {0.0, 7.9, 10.0, 15.0, 23.5, 24.0 + 16.0}) EXPECT_EQ(meal_forcing(s, t), 0.0) << t;
  EXPECT_EQ(workout_forcing(s, 17.99), 0.0);
}

TEST(Forcing, LunchContribution) {
  const LifestyleSchedule s = LifestyleSchedule::standard();
  EXPECT_EQ(meal_forcing(s, 12.0), 4200.0);
  EXPECT_EQ(meal_forcing(s, 12.3), 4200.0);
  EXPECT_EQ(meal_forcing(s, 24.0 * 3 + 12.3), 4200.0);
  EXPECT_EQ(meal_forcing(s, 12.0 * 1.05), 0.0);  // half-open window
}

TEST(Forcing, OverlappingWindowsAdd) {
  LifestyleSchedule s;
  s.meals = {{12.0, 42.0, 100.0}, {12.2, 4.0, 50.0}};
  EXPECT_EQ(meal_forcing(s, 12.3), 4200.0 + 200.0);
}

TEST(Forcing, Workout) {
  const LifestyleSchedule s = LifestyleSchedule::standard();
  EXPECT_EQ(workout_forcing(s, 18.5), 200.0);
  LifestyleSchedule none = s;
  none.workouts.clear();
  for (double t = 0.0; t < 48.0; t += 0.25) EXPECT_EQ(workout_forcing(none, t), 0.0);
}

TEST(Diabetes, BasalProductionAtZeroGlucose) {
  const DiabetesParams p;
  EXPECT_EQ(rhs_at(p, 0.0, 10.0, 300.0, 0.2)[G], p.R0);
}

TEST(Diabetes, BetaEquilibriumAtFixedGlucose) {
  const DiabetesParams p;
  for (double g : {120.0, 180.0, 300.0}) {
    const double beta_star = (p.r1 * g - p.r0) / (p.r2 * g * g);
    ASSERT_GT(beta_star, 0.0);
    EXPECT_NEAR(rhs_at(p, g, 10.0, beta_star, 0.0)[BetaF], 0.0, 1e-12);
    // Long integration of the beta equation alone with G held.
    double beta = 300.0;
    const double h = 0.5;
    auto f = [&](double b) { return rhs_at(p, g, 10.0, b, 0.0)[BetaF]; };
    for (int k = 0; k < 200000; ++k) {
      const double k1 = f(beta), k2 = f(beta + 0.5 * h * k1), k3 = f(beta + 0.5 * h * k2), k4 = f(beta + h * k3);
      beta += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    EXPECT_NEAR(beta, beta_star, 1e-6 * beta_star) << g;
  }
}

TEST(Diabetes, InsulinNullcline) {
  const DiabetesParams p;
  for (double g : {90.0, 150.0}) {
    const double beta = 280.0;
    const double i_star = p.sigma * beta * g * g / (p.k * (p.alpha + g * g));
    EXPECT_NEAR(rhs_at(p, g, i_star, beta, 0.0)[I], 0.0, 1e-12);
  }
}

TEST(Diabetes, BetaCellDeclineAboveThreshold) {
  const DiabetesParams p;
  // With beta at its reference mass, sustained glucose above the upper
  // equilibrium drives net beta-cell loss; between the two it grows.
  EXPECT_LT(rhs_at(p, 300.0, 10.0, p.beta_ref, 0.0)[BetaF], 0.0);
  EXPECT_GT(rhs_at(p, 180.0, 10.0, p.beta_ref, 0.0)[BetaF], 0.0);
  EXPECT_LT(rhs_at(p, 80.0, 10.0, p.beta_ref, 0.0)[BetaF], 0.0);
}

TEST(Diabetes, FastingStateIsFixedPoint) {
  const DiabetesParams p = calibrate({}, 100.0);
  const Eigen::VectorXd y = fasting_state(p);
  EXPECT_NEAR(y[G], 100.0, 1e-6);
  Eigen::VectorXd dy;
  diabetes_rhs<double>(p, y, 0.0, 0.0, 0.0, dy);
  EXPECT_NEAR(dy[G], 0.0, 1e-7);
  EXPECT_NEAR(dy[I], 0.0, 1e-7);
  EXPECT_NEAR(dy[IR], 0.0, 1e-9);
}

TEST(Diabetes, HealthyPeakInNormalBand) {
  const DiabetesRun run = run_diabetes(100.0, LifestyleSchedule::standard(), 5.0);
  EXPECT_GE(run.post_meal_peak, 108.0);
  EXPECT_LE(run.post_meal_peak, 125.0);
}

TEST(Diabetes, DiabeticPeakInHighBand) {
  const DiabetesRun run = run_diabetes(170.0, LifestyleSchedule::standard(), 5.0);
  EXPECT_GE(run.post_meal_peak, 180.0);
  EXPECT_LE(run.post_meal_peak, 200.0);
  EXPECT_LT(run.params.phi, 1.0);
}

TEST(Diabetes, WorkoutLowersSameDayPeak) {
  LifestyleSchedule with = LifestyleSchedule::standard();
  with.meals = {{17.5, 42.0, 100.0}};
  LifestyleSchedule without = with;
  without.workouts.clear();
  const TimeSeries a = run_diabetes(100.0, with, 1.0).series;
  const TimeSeries b = run_diabetes(100.0, without, 1.0).series;
  EXPECT_LT(day_peak(a, 0), day_peak(b, 0));
}

TEST(Diabetes, ZeroMealsApproachFastingMonotonically) {
  LifestyleSchedule s;
  const DiabetesParams p = calibrate({}, 100.0);
  DiabetesModule m(p, s);
  Eigen::VectorXd y0 = fasting_state(p);
  y0[G] = 160.0;
  m.set_initial_state(y0);
  const std::vector<Signal> inputs{Signal::constant(0.0, "1")};
  const auto grid = uniform_grid(0.0, 48.0 * 3600.0, 180.0);
  const TimeSeries ts = integrate(m, 0.0, grid.back(), inputs, {}, grid);
  const Eigen::VectorXd g = ts.column("G");
  // Monotone descent while above the fixed point. The slow beta-cell mode
  // then leaves a small undershoot that relaxes over weeks.
  for (Eigen::Index i = 1; i < g.size() && g[i - 1] > 100.0; ++i) EXPECT_LE(g[i], g[i - 1]) << ts.time()[i];
  EXPECT_GT(g.minCoeff(), 100.0 - 0.05);
  EXPECT_LT(std::abs(g[g.size() - 1] - 100.0), 0.05);
}

TEST(Diabetes, GlucoseAndInsulinStayNonNegative) {
  LifestyleSchedule s;
  s.meals = {{8.0, 4.0, 10.0}};
  s.workouts = {{6.0, 2000.0}, {18.0, 2000.0}};
  const TimeSeries ts = run_diabetes(100.0, s, 2.0).series;
  EXPECT_GE(ts.column("G").minCoeff(), 0.0);
  EXPECT_GE(ts.column("I").minCoeff(), 0.0);
}

TEST(Diabetes, PhasePortraitBounded) {
  for (double baseline : {100.0, 170.0}) {
    const TimeSeries ts = run_diabetes(baseline, LifestyleSchedule::standard(), 5.0).series;
    const Eigen::VectorXd g = ts.column("G");
    const Eigen::VectorXd i = ts.column("I");
    EXPECT_TRUE(g.allFinite() && i.allFinite());
    EXPECT_LT(g.maxCoeff(), 400.0);
    EXPECT_LT(i.maxCoeff(), 500.0);
    // Day 5 revisits the day 4 orbit.
    EXPECT_NEAR(day_peak(ts, 4), day_peak(ts, 3), 0.01 * day_peak(ts, 3));
  }
}

TEST(Diabetes, PostMealWindowsCoverMainMeals) {
  const auto w = post_meal_windows(LifestyleSchedule::standard(), 2.0);
  ASSERT_EQ(w.size(), 4u);  // lunch and dinner, two days
  EXPECT_EQ(w[0].first, 12.0 * 3600.0);
  EXPECT_NEAR(w[0].second, (12.0 * 1.05 + 2.0) * 3600.0, 1e-9);
}

TEST(Diabetes, SelfConvergence) {
  const DiabetesParams p = calibrate({}, 170.0);
  DiabetesModule m(p, LifestyleSchedule::standard());
  const std::vector<Signal> inputs{Signal::constant(0.0, "1")};
  const auto grid = uniform_grid(0.0, 86400.0, 180.0);
  IntegratorConfig loose;
  IntegratorConfig tight;
  tight.rtol = loose.rtol / 2;
  tight.atol = loose.atol / 2;
  const TimeSeries a = integrate(m, 0.0, 86400.0, inputs, loose, grid);
  const TimeSeries b = integrate(m, 0.0, 86400.0, inputs, tight, grid);
  const Eigen::Index n = m.layout().size();
  EXPECT_LT(testing::convergence_ratio(a, b, loose, n), 1.0);
}

TEST(Diabetes, AgreesWithRk4OracleOverOneDay) {
  const DiabetesParams p = calibrate({}, 170.0);
  DiabetesModule m(p, LifestyleSchedule::standard());
  const std::vector<Signal> inputs{Signal::constant(2.0, "1")};
  const auto grid = uniform_grid(0.0, 86400.0, 180.0);
  IntegratorConfig oracle;
  oracle.method = Method::fixed_rk4_oracle;
  oracle.max_step_s = 1.0;
  EXPECT_LT(relative_linf(integrate(m, 0.0, 86400.0, inputs, {}, grid),
                          integrate(m, 0.0, 86400.0, inputs, oracle, grid)),
            0.005);
}

TEST(Diabetes, RejectsBadSchedules) {
  LifestyleSchedule s = LifestyleSchedule::standard();
  s.meals.push_back({25.0, 1.0, 1.0});
  EXPECT_THROW(s.validate(), ConfigError);
  s = LifestyleSchedule::standard();
  s.delta_meal = -0.1;
  EXPECT_THROW(s.validate(), ConfigError);
}

}  // namespace
}  // namespace compatient::diabetes
