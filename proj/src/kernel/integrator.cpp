#include "compatient/kernel/integrator.hpp"
#include "compatient/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace compatient {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::adaptive_stiff:
      return "adaptive-stiff";
    case Method::adaptive_explicit:
      return "adaptive-explicit";
    case Method::fixed_rk4_oracle:
      return "fixed-rk4-oracle";
  }
  return "adaptive-stiff";
}

Method parse_method(std::string_view name) {
  if (name == "adaptive-stiff") return Method::adaptive_stiff;
  if (name == "adaptive-explicit") return Method::adaptive_explicit;
  if (name == "fixed-rk4-oracle") return Method::fixed_rk4_oracle;
  throw ConfigError("method", "unknown integration method '" + std::string(name) + "'");
}

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0)) throw ConfigError("rtol", "must be > 0");
  if (!(atol > 0.0)) throw ConfigError("atol", "must be > 0");
  if (!(max_step_s > 0.0)) throw ConfigError("max_step", "must be > 0");
  if (method == Method::fixed_rk4_oracle && !std::isfinite(max_step_s)) {
    throw ConfigError("max_step", "the fixed-step oracle needs a finite step");
  }
}

std::vector<double> uniform_grid(double t0_s, double t1_s, double dt_s) {
  if (!(dt_s > 0.0) || t1_s < t0_s) throw std::invalid_argument("uniform_grid: bad interval or step");
  const auto n = static_cast<std::size_t>(std::floor((t1_s - t0_s) / dt_s + 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 2);
  for (std::size_t k = 0; k <= n; ++k) grid.push_back(t0_s + static_cast<double>(k) * dt_s);
  if (t1_s - grid.back() > 1e-9 * std::max(1.0, std::abs(t1_s))) {
    grid.push_back(t1_s);
  } else {
    grid.back() = std::min(grid.back(), t1_s);
  }
  return grid;
}

namespace {

using Eigen::VectorXd;

/// Module plus bound inputs, evaluated in module time units. Within a segment
/// [a, b] any evaluation at t >= b is moved to the left limit of b, so
/// right-continuous discontinuities at b are not seen before they happen.
class Problem {
 public:
  Problem(const ModelModule& module, std::span<const Signal> inputs)
      : module_(module), inputs_(inputs), unit_(module.seconds_per_time_unit()), u_(inputs.size()) {}

  void set_segment_end(double b) {
    end_ = b;
    end_left_ = std::nextafter(b, -std::numeric_limits<double>::infinity());
  }

  void operator()(double t, const VectorXd& y, VectorXd& dy) {
    if (t >= end_) t = end_left_;
    for (std::size_t i = 0; i < inputs_.size(); ++i) u_[i] = inputs_[i](t * unit_);
    dy.resize(y.size());
    module_.rhs(t, y, u_, dy);
    ++evaluations;
  }

  void switches(double t, const VectorXd& y, VectorXd& out) {
    if (t >= end_) t = end_left_;
    for (std::size_t i = 0; i < inputs_.size(); ++i) u_[i] = inputs_[i](t * unit_);
    out.resize(module_.switch_count());
    module_.switches(t, y, u_, out);
  }

  void observe(double t, const VectorXd& y, Eigen::Ref<VectorXd> out) {
    for (std::size_t i = 0; i < inputs_.size(); ++i) u_[i] = inputs_[i](t * unit_);
    module_.observe(t, y, u_, out);
  }

  const ModelModule& module() const { return module_; }
  double unit() const { return unit_; }
  std::size_t evaluations = 0;

 private:
  const ModelModule& module_;
  std::span<const Signal> inputs_;
  double unit_;
  std::vector<double> u_;
  double end_ = std::numeric_limits<double>::infinity();
  double end_left_ = std::numeric_limits<double>::infinity();
};

VectorXd hermite(double th, double h, const VectorXd& y0, const VectorXd& f0, const VectorXd& y1, const VectorXd& f1) {
  const double h10 = th * (1.0 - th) * (1.0 - th);
  const double h01 = th * th * (3.0 - 2.0 * th);
  const double h11 = th * th * (th - 1.0);
  return y0 + h01 * (y1 - y0) + (h10 * h) * f0 + (h11 * h) * f1;
}

/// Accumulates samples from cubic Hermite interpolation of accepted steps.
class Sampler {
 public:
  Sampler(Problem& problem, std::span<const double> times_mod, Eigen::Index n_state, Eigen::Index n_obs)
      : problem_(problem), times_(times_mod), values_(times_mod.size(), n_state + n_obs), n_state_(n_state) {}

  /// Emits samples with time in [t0, t1] using the Hermite cubic through
  /// (t0, y0, f0) and (t1, y1, f1).
  void emit(double t0, const VectorXd& y0, const VectorXd& f0, double t1, const VectorXd& y1, const VectorXd& f1) {
    const double h = t1 - t0;
    while (next_ < times_.size() && times_[next_] <= t1) {
      const double s = times_[next_];
      if (s == t1) {
        record(s, y1);
      } else if (s == t0 || h == 0.0) {
        record(s, y0);
      } else {
        record(s, hermite((s - t0) / h, h, y0, f0, y1, f1));
      }
    }
  }

  void emit_exact(double t, const VectorXd& y) {
    while (next_ < times_.size() && times_[next_] == t) record(t, y);
  }

  Eigen::MatrixXd take() { return std::move(values_); }

  double next_time() const {
    return next_ < times_.size() ? times_[next_] : std::numeric_limits<double>::infinity();
  }

 private:
  void record(double s, const VectorXd& y) {
    auto row = values_.row(static_cast<Eigen::Index>(next_));
    row.head(n_state_) = y.transpose();
    if (values_.cols() > n_state_) {
      VectorXd obs(values_.cols() - n_state_);
      problem_.observe(s, y, obs);
      row.tail(values_.cols() - n_state_) = obs.transpose();
    }
    ++next_;
  }

  Problem& problem_;
  std::span<const double> times_;
  Eigen::MatrixXd values_;
  Eigen::Index n_state_;
  std::size_t next_ = 0;
};

/// Earliest time in (t0, t1] where a switching function changes sign relative
/// to `signs`, located on the step's Hermite interpolant. Returns the upper end
/// of the final bracket, or t1 when nothing switches.
double first_switch(Problem& f, const Eigen::VectorXi& signs, double t0, const VectorXd& y0, const VectorXd& f0,
                    double t1, const VectorXd& y1, const VectorXd& f1, const VectorXd& g1) {
  const double h = t1 - t0;
  double lo = 0.0;
  double hi = 1.0;
  bool crossed = false;
  for (Eigen::Index i = 0; i < g1.size(); ++i) crossed |= signs[i] != 0 && g1[i] * signs[i] < 0.0;
  if (!crossed) return t1;
  VectorXd g;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    f.switches(t0 + mid * h, hermite(mid, h, y0, f0, y1, f1), g);
    bool any = false;
    for (Eigen::Index i = 0; i < g.size(); ++i) any |= signs[i] != 0 && g[i] * signs[i] < 0.0;
    (any ? hi : lo) = mid;
  }
  return t0 + hi * h;
}

Eigen::VectorXi sign_of(const VectorXd& g) {
  Eigen::VectorXi s(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) s[i] = g[i] > 0.0 ? 1 : (g[i] < 0.0 ? -1 : 0);
  return s;
}

void check_finite(const Problem& p, const VectorXd& y, double t) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw NonFiniteState(p.module().id(), p.module().layout()[i].name, t * p.unit());
  }
}

Eigen::Index first_non_finite(const VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) return i;
  }
  return -1;
}

double error_norm(const VectorXd& err, const VectorXd& y0, const VectorXd& y1, double rtol, double atol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / sc);
  }
  return worst;
}

constexpr std::size_t kMaxSteps = 50'000'000;

struct StepResult {
  VectorXd y;
  VectorXd f;  // derivative at the new point
  double error = 0.0;
};

class Dopri5 {
 public:
  static constexpr double order_exponent = 1.0 / 5.0;

  StepResult step(Problem& f, double t, const VectorXd& y, const VectorXd& f0, double h, double rtol, double atol) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    f(t + c2 * h, y + h * a21 * f0, k2_);
    f(t + c3 * h, y + h * (a31 * f0 + a32 * k2_), k3_);
    f(t + c4 * h, y + h * (a41 * f0 + a42 * k2_ + a43 * k3_), k4_);
    f(t + c5 * h, y + h * (a51 * f0 + a52 * k2_ + a53 * k3_ + a54 * k4_), k5_);
    f(t + h, y + h * (a61 * f0 + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_), k6_);
    StepResult r;
    r.y = y + h * (b1 * f0 + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
    f(t + h, r.y, r.f);
    const VectorXd err = h * (e1 * f0 + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * r.f);
    r.error = error_norm(err, y, r.y, rtol, atol);
    return r;
  }

 private:
  VectorXd k2_, k3_, k4_, k5_, k6_;
};

/// Four-stage Rosenbrock method of order 4 with an embedded order 3 error
/// estimate (Kaps-Rentrop form, Shampine's coefficients). Finite-difference
/// Jacobian refreshed every step.
class Rosenbrock4 {
 public:
  static constexpr double order_exponent = 1.0 / 4.0;

  StepResult step(Problem& f, double t, const VectorXd& y, const VectorXd& f0, double h, double rtol, double atol) {
    constexpr double gam = 0.5;
    constexpr double a21 = 2.0, a31 = 48.0 / 25, a32 = 6.0 / 25;
    constexpr double c21 = -8.0, c31 = 372.0 / 25, c32 = 12.0 / 5;
    constexpr double c41 = -112.0 / 125, c42 = -54.0 / 125, c43 = -2.0 / 5;
    constexpr double b1 = 19.0 / 9, b2 = 0.5, b3 = 25.0 / 108, b4 = 125.0 / 108;
    constexpr double e1 = 17.0 / 54, e2 = 7.0 / 36, e4 = 125.0 / 108;
    constexpr double g1x = 0.5, g2x = -1.5, g3x = 121.0 / 50, g4x = 29.0 / 250;
    constexpr double a2x = 1.0, a3x = 3.0 / 5;
    jacobian(f, t, y, f0);

    Eigen::MatrixXd w = -jac_;
    w.diagonal().array() += 1.0 / (gam * h);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(w);

    const VectorXd g1 = lu.solve(f0 + (h * g1x) * dfdt_);
    f(t + a2x * h, y + a21 * g1, fs_);
    const VectorXd g2 = lu.solve(fs_ + (h * g2x) * dfdt_ + (c21 / h) * g1);
    f(t + a3x * h, y + a31 * g1 + a32 * g2, fs_);
    const VectorXd g3 = lu.solve(fs_ + (h * g3x) * dfdt_ + (c31 * g1 + c32 * g2) / h);
    const VectorXd g4 = lu.solve(fs_ + (h * g4x) * dfdt_ + (c41 * g1 + c42 * g2 + c43 * g3) / h);
    StepResult r;
    r.y = y + b1 * g1 + b2 * g2 + b3 * g3 + b4 * g4;
    const VectorXd err = e1 * g1 + e2 * g2 + e4 * g4;
    r.error = error_norm(err, y, r.y, rtol, atol);
    if (r.error <= 1.0 && std::isfinite(r.error)) f(t + h, r.y, r.f);
    return r;
  }

 private:
  void jacobian(Problem& f, double t, const VectorXd& y, const VectorXd& f0) {
    const Eigen::Index n = y.size();
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    jac_.resize(n, n);
    VectorXd yp = y;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double delta = sqrt_eps * std::max(std::abs(y[j]), 1.0);
      yp[j] = y[j] + delta;
      f(t, yp, fp_);
      jac_.col(j) = (fp_ - f0) / delta;
      yp[j] = y[j];
    }
    const double dt = sqrt_eps * std::max(std::abs(t), 1.0);
    // Backward difference keeps the probe inside the current segment.
    f(t - dt, y, fp_);
    dfdt_ = (f0 - fp_) / dt;
  }

  Eigen::MatrixXd jac_;
  VectorXd fp_, fs_, dfdt_;
};

double initial_step(Problem& f, double t, const VectorXd& y, const VectorXd& f0, double span, double hmax,
                    double rtol, double atol, double exponent) {
  const VectorXd sc = (atol + rtol * y.array().abs()).matrix();
  const double d0 = (y.array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(y.size()));
  const double d1 = (f0.array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(y.size()));
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
  h0 = std::min({h0, hmax, span});
  VectorXd f1;
  f(t + h0, y + h0 * f0, f1);
  const double d2 =
      ((f1 - f0).array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(y.size())) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, exponent);
  return std::min({100.0 * h0, h1, hmax, span});
}

template <typename Stepper>
void run_adaptive(Problem& f, std::span<const double> segments, VectorXd& y, Sampler& sampler,
                  const IntegratorConfig& cfg, IntegrationStats& stats) {
  Stepper stepper;
  const double hmax = cfg.max_step_s / f.unit();
  double h = 0.0;
  std::size_t steps = 0;
  VectorXd f0;
  const bool has_switches = f.module().switch_count() > 0;
  VectorXd g;
  Eigen::VectorXi signs;
  for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
    const double a = segments[s];
    const double b = segments[s + 1];
    f.set_segment_end(b);
    double t = a;
    f(t, y, f0);
    if (h == 0.0) h = initial_step(f, t, y, f0, b - a, hmax, cfg.rtol, cfg.atol, Stepper::order_exponent);
    if (has_switches) {
      f.switches(t, y, g);
      signs = sign_of(g);
    }
    double event_t = std::numeric_limits<double>::infinity();
    bool last_rejected = false;
    while (t < b) {
      if (++steps > kMaxSteps) throw StepFailure(f.module().id(), "maximum number of steps exceeded");
      double hs = std::min(h, hmax);
      // Output times are hit exactly. Interpolating between steps costs accuracy,
      // badly so for stiff components.
      double target = std::min(b, sampler.next_time());
      // Samples a few ulps short of a breakpoint are emitted from the step
      // that reaches the breakpoint.
      if (target <= t || b - target <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(b), 1.0))
        target = b;
      const bool event_step = event_t > t && event_t < target;
      if (event_step) target = event_t;
      bool reaches_end = false;
      if (t + hs >= target || t + 1.01 * hs >= target) {
        hs = target - t;
        reaches_end = true;
      }
      const double min_step = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0);
      if (hs < min_step) {
        throw StepFailure(f.module().id(),
                          "step size underflow at t = " + std::to_string(t * f.unit()) + " s (stiffness not handled)");
      }
      StepResult r = stepper.step(f, t, y, f0, hs, cfg.rtol, cfg.atol);
      const Eigen::Index bad = first_non_finite(r.y);
      if (bad >= 0 || !std::isfinite(r.error)) {
        ++stats.rejected_steps;
        h = 0.1 * hs;
        if (h < min_step) {
          const Eigen::Index idx = bad >= 0 ? bad : 0;
          throw NonFiniteState(f.module().id(), f.module().layout()[idx].name, t * f.unit());
        }
        last_rejected = true;
        continue;
      }
      if (r.error <= 1.0) {
        const double t_new = reaches_end ? target : t + hs;
        if (has_switches) {
          f.switches(t_new, r.y, g);
          if (!event_step) {
            // End the step on a kink rather than straddling it, unless the
            // kink sits at either end already.
            const double t_sw = first_switch(f, signs, t, y, f0, t_new, r.y, r.f, g);
            if (t_sw - t > 1e-6 * hs && t_new - t_sw > 1e-6 * hs) {
              event_t = t_sw;
              continue;
            }
          }
          for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (g[i] != 0.0) signs[i] = g[i] > 0.0 ? 1 : -1;
          }
        }
        sampler.emit(t, y, f0, t_new, r.y, r.f);
        t = t_new;
        y = std::move(r.y);
        f0 = std::move(r.f);
        ++stats.accepted_steps;
        double factor = r.error == 0.0 ? 5.0 : 0.9 * std::pow(r.error, -Stepper::order_exponent);
        factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
        // Keep the trial size when the step was shortened to hit the segment end.
        h = reaches_end ? std::max(h, hs * factor) : hs * factor;
        last_rejected = false;
      } else {
        ++stats.rejected_steps;
        h = hs * std::max(0.2, 0.9 * std::pow(r.error, -Stepper::order_exponent));
        last_rejected = true;
      }
    }
    check_finite(f, y, t);
  }
}

void run_rk4(Problem& f, std::span<const double> segments, VectorXd& y, Sampler& sampler,
             const IntegratorConfig& cfg, IntegrationStats& stats) {
  const double hmax = cfg.max_step_s / f.unit();
  VectorXd k1, k2, k3, k4, f_new;
  for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
    const double a = segments[s];
    const double b = segments[s + 1];
    f.set_segment_end(b);
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / hmax - 1e-9));
    const std::size_t steps = std::max<std::size_t>(n, 1);
    if (steps > kMaxSteps) throw StepFailure(f.module().id(), "fixed-step oracle needs too many steps");
    const double h = (b - a) / static_cast<double>(steps);
    f(a, y, k1);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = a + static_cast<double>(k) * h;
      const double t_new = (k + 1 == steps) ? b : a + static_cast<double>(k + 1) * h;
      const double hk = t_new - t;
      f(t + 0.5 * hk, y + 0.5 * hk * k1, k2);
      f(t + 0.5 * hk, y + 0.5 * hk * k2, k3);
      f(t_new, y + hk * k3, k4);
      VectorXd y_new = y + (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      check_finite(f, y_new, t_new);
      f(t_new, y_new, f_new);
      sampler.emit(t, y, k1, t_new, y_new, f_new);
      y = std::move(y_new);
      k1 = f_new;
      ++stats.accepted_steps;
    }
  }
}

}  // namespace

TimeSeries integrate(const ModelModule& module, double t0_s, double t1_s, std::span<const Signal> inputs,
                     const IntegratorConfig& cfg, std::span<const double> sample_times_s,
                     const IntegrateOptions& options) {
  cfg.validate();
  if (!(t1_s > t0_s)) throw std::invalid_argument("integrate: need t1 > t0");
  const auto ports = module.input_ports();
  if (inputs.size() != ports.size()) {
    throw WiringError("module '" + module.id() + "' expects " + std::to_string(ports.size()) + " inputs, got " +
                      std::to_string(inputs.size()));
  }
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (!inputs[i]) throw WiringError("module '" + module.id() + "': input '" + ports[i].name + "' is unbound");
    if (!inputs[i].covers(t0_s, t1_s)) {
      throw WiringError("module '" + module.id() + "': input '" + ports[i].name + "' is not defined on [t0, t1]");
    }
  }
  if (!std::is_sorted(sample_times_s.begin(), sample_times_s.end()) ||
      (!sample_times_s.empty() && (sample_times_s.front() < t0_s || sample_times_s.back() > t1_s))) {
    throw std::invalid_argument("integrate: sample times must be sorted and inside [t0, t1]");
  }

  const double unit = module.seconds_per_time_unit();
  const double t0 = t0_s / unit;
  const double t1 = t1_s / unit;

  std::vector<double> segments{t0};
  for (double b : module.breakpoints(t0, t1)) {
    if (b > t0 && b < t1) segments.push_back(b);
  }
  for (const auto& sig : inputs) {
    for (double b_s : sig.breakpoints()) {
      const double b = b_s / unit;
      if (b > t0 && b < t1) segments.push_back(b);
    }
  }
  segments.push_back(t1);
  std::sort(segments.begin(), segments.end());
  segments.erase(std::unique(segments.begin(), segments.end()), segments.end());

  std::vector<double> samples_mod(sample_times_s.size());
  for (std::size_t i = 0; i < sample_times_s.size(); ++i) {
    samples_mod[i] = sample_times_s[i] == t0_s ? t0 : (sample_times_s[i] == t1_s ? t1 : sample_times_s[i] / unit);
  }

  Problem problem(module, inputs);
  VectorXd y = options.initial_state ? *options.initial_state : module.initial_state();
  if (y.size() != module.layout().size()) throw std::invalid_argument("initial state size does not match layout");
  check_finite(problem, y, t0);

  const auto observables = module.observables();
  Sampler sampler(problem, samples_mod, y.size(), static_cast<Eigen::Index>(observables.size()));
  sampler.emit_exact(t0, y);

  IntegrationStats local;
  IntegrationStats& stats = options.stats ? *options.stats : local;
  switch (cfg.method) {
    case Method::adaptive_explicit:
      run_adaptive<Dopri5>(problem, segments, y, sampler, cfg, stats);
      break;
    case Method::adaptive_stiff:
      run_adaptive<Rosenbrock4>(problem, segments, y, sampler, cfg, stats);
      break;
    case Method::fixed_rk4_oracle:
      run_rk4(problem, segments, y, sampler, cfg, stats);
      break;
  }
  stats.rhs_evaluations += problem.evaluations;

  std::vector<Variable> columns = module.layout().variables();
  columns.insert(columns.end(), observables.begin(), observables.end());
  Eigen::VectorXd time = Eigen::Map<const Eigen::VectorXd>(sample_times_s.data(),
                                                           static_cast<Eigen::Index>(sample_times_s.size()));
  return TimeSeries(std::move(columns), std::move(time), sampler.take());
}

}  // namespace compatient
