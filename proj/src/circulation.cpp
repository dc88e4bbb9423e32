#include "compatient/circulation.hpp"
#include "compatient/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace compatient::circulation {

double Baroreceptor::set_point(double p_mmHg) const { return std::max(0.0, n0 + gain * (p_mmHg - p_ref)); }

CirculationParams CirculationParams::defaults() {
  using enum Circuit;
  CirculationParams p;
  p.vessels = {
      {"aop", systemic, 0.25, 30.0, 95.0},
      {"aod", systemic, 0.35, 50.0, 94.7},
      {"sa", systemic, 0.6, 150.0, 93.8},
      {"sar", systemic, 0.4, 50.0, 89.7, PvLaw::exponential, 10.0},
      {"sc", systemic, 1.0, 250.0, 33.3},
      {"sv", systemic, 45.0, 1500.0, 9.2, PvLaw::exponential, 5.0},
      {"vc", systemic, 10.0, 500.0, 5.0, PvLaw::exponential, 2.0},
      {"pap", pulmonary, 0.6, 30.0, 15.0},
      {"pad", pulmonary, 0.9, 50.0, 14.7},
      {"ps", pulmonary, 1.5, 50.0, 13.8},
      {"pc", pulmonary, 3.0, 100.0, 10.8},
      {"pv", pulmonary, 8.0, 200.0, 8.6},
      {"cep", coronary, 0.02, 5.0, 90.0},
      {"cim", coronary, 0.05, 5.0, 85.0},
      {"cc", coronary, 0.1, 10.0, 45.0},
      {"cv", coronary, 0.5, 20.0, 10.0},
  };
  p.chambers = {
      {"ra", 0.15, 0.25, 10.0, ActivationKind::atrial, 4.0},
      {"rv", 0.04, 0.6, 20.0, ActivationKind::ventricular, 5.0},
      {"la", 0.15, 0.25, 10.0, ActivationKind::atrial, 8.0},
      {"lv", 0.06, 2.5, 10.0, ActivationKind::ventricular, 9.0},
  };
  p.resistors = {
      {"sa", "sar", 0.05},  {"sar", "sc", 0.68}, {"sc", "sv", 0.29},  {"sv", "vc", 0.05},
      {"vc", "ra", 0.012},  {"ps", "pc", 0.035}, {"pc", "pv", 0.025}, {"pv", "la", 0.007},
      {"aop", "cep", 0.8},  {"cep", "cim", 1.5}, {"cim", "cc", 14.0}, {"cc", "cv", 10.0},
      {"cv", "ra", 2.1},
  };
  p.inertial = {
      {"aop", "aod", 2e-4, 0.004, 86.0},
      {"aod", "sa", 5e-4, 0.01, 83.0},
      {"pap", "pad", 2e-4, 0.004, 86.0},
      {"pad", "ps", 4e-4, 0.01, 86.0},
  };
  p.valves = {
      {"tricuspid", "ra", "rv", 0.005},
      {"pulmonary", "rv", "pap", 0.005},
      {"mitral", "la", "lv", 0.005},
      {"aortic", "lv", "aop", 0.005},
  };
  return p;
}

void CirculationParams::validate() const {
  if (!(period_s > 0.0)) throw ConfigError("circulation.period", "heart period must be > 0");
  for (const auto& v : vessels) {
    if (!(v.C > 0.0)) throw ConfigError("circulation." + v.id + ".C", "compliance must be > 0");
    if (!(v.V_u >= 0.0)) throw ConfigError("circulation." + v.id + ".V_u", "unstressed volume must be >= 0");
    if (v.law == PvLaw::exponential && !(v.P0 > 0.0)) {
      throw ConfigError("circulation." + v.id + ".P0", "exponential law needs P0 > 0");
    }
  }
  for (const auto& c : chambers) {
    if (!(c.E_min > 0.0 && c.E_max >= c.E_min)) {
      throw ConfigError("circulation." + c.id, "need E_max >= E_min > 0");
    }
  }
  for (const auto& r : resistors) {
    if (!(r.R > 0.0)) throw ConfigError("circulation." + r.from + "-" + r.to, "resistance must be > 0");
  }
  for (const auto& l : inertial) {
    if (!(l.R > 0.0 && l.L > 0.0)) throw ConfigError("circulation." + l.from + "-" + l.to, "need R, L > 0");
  }
  for (const auto& v : valves) {
    if (!(v.R > 0.0)) throw ConfigError("circulation." + v.id, "valve resistance must be > 0");
  }
  if (!(baro.zeta >= 0.0 && baro.omega > 0.0)) throw ConfigError("circulation.baro", "need zeta >= 0, omega > 0");
  if (!(compliance_floor > 0.0 && compliance_floor <= 1.0)) {
    throw ConfigError("circulation.compliance_floor", "must lie in (0, 1]");
  }
}

ActivationCurve::ActivationCurve(const Activation& a, double period_s) : a_(a), period_(period_s) {
  // Coarse scan then golden-section refinement of the peak.
  constexpr int n = 4000;
  double best = 0.0;
  double best_t = 0.0;
  for (int i = 1; i < n; ++i) {
    const double tt = period_ * i / n;
    const double v = raw(tt);
    if (v > best) {
      best = v;
      best_t = tt;
    }
  }
  double lo = std::max(0.0, best_t - period_ / n);
  double hi = std::min(period_, best_t + period_ / n);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double x1 = hi - g * (hi - lo);
    const double x2 = lo + g * (hi - lo);
    if (raw(x1) < raw(x2)) {
      lo = x1;
    } else {
      hi = x2;
    }
  }
  peak_time_ = 0.5 * (lo + hi);
  norm_ = raw(peak_time_);
}

double ActivationCurve::raw(double tt) const {
  const double g1 = std::pow(tt / (a_.tau1 * period_), a_.m1);
  const double g2 = std::pow(tt / (a_.tau2 * period_), a_.m2);
  return g1 / (1.0 + g1) / (1.0 + g2);
}

double ActivationCurve::operator()(double t_s) const {
  double tt = std::fmod(t_s - a_.shift * period_, period_);
  if (tt < 0.0) tt += period_;
  return std::min(1.0, raw(tt) / norm_);
}

double elastance(double t_s, const Chamber& chamber, const ActivationCurve& activation) {
  return chamber.E_min + (chamber.E_max - chamber.E_min) * activation(t_s);
}

CirculationModule::CirculationModule(CirculationParams params, std::vector<double> vessel_factors, std::string id)
    : params_(std::move(params)),
      factors_(std::move(vessel_factors)),
      id_(std::move(id)),
      ventricular_(params_.ventricular, params_.period_s),
      atrial_(params_.atrial, params_.period_s) {
  params_.validate();
  if (factors_.empty()) factors_.assign(params_.vessels.size(), 1.0);
  if (factors_.size() != params_.vessels.size()) throw ConfigError("circulation", "one factor per vessel required");

  std::vector<compatient::Variable> vars;
  for (const auto& v : params_.vessels) {
    vars.push_back({"V_" + v.id, "mL"});
    scaled_.push_back(v.circuit != Circuit::coronary || params_.scale_coronary);
  }
  for (const auto& c : params_.chambers) vars.push_back({"V_" + c.id, "mL"});
  for (const auto& l : params_.inertial) vars.push_back({"Q_" + l.from + "_" + l.to, "mL/s"});
  vars.push_back({"n_br", "Hz"});
  vars.push_back({"n_br_dot", "Hz/s"});
  layout_ = StateLayout(std::move(vars));
  baro_ = layout_.index_of("n_br");

  for (const auto& v : params_.vessels) observables_.push_back({"P_" + v.id, "mmHg"});
  for (const auto& c : params_.chambers) observables_.push_back({"P_" + c.id, "mmHg"});
  for (const auto& v : params_.valves) observables_.push_back({"q_" + v.id, "mL/s"});
  observables_.push_back({"abp", "mmHg"});
  observables_.push_back({"pressure_offset", "mmHg"});

  for (const auto& r : params_.resistors) {
    resistors_.push_back({compartment_index(r.from), compartment_index(r.to), r.R});
  }
  for (const auto& l : params_.inertial) {
    inertial_.push_back({compartment_index(l.from), compartment_index(l.to),
                         layout_.index_of("Q_" + l.from + "_" + l.to), l.L, l.R});
  }
  for (const auto& v : params_.valves) valves_.push_back({compartment_index(v.from), compartment_index(v.to), v.R});
  aortic_root_ = compartment_index("aop");

  initial_ = Eigen::VectorXd::Zero(layout_.size());
  Eigen::Index k = 0;
  for (const auto& v : params_.vessels) {
    if (v.law == PvLaw::linear) {
      initial_[k++] = v.V_u + v.C * v.P_nom;
    } else {
      initial_[k++] = v.V_u + v.C * (v.P_nom + v.P0) * std::log1p(v.P_nom / v.P0);
    }
  }
  for (const auto& c : params_.chambers) initial_[k++] = c.V_u + c.P_init / c.E_min;
  for (const auto& l : params_.inertial) initial_[k++] = l.q0;
  initial_[baro_] = params_.baro.set_point(params_.baro.p_ref);
}

Eigen::Index CirculationModule::compartment_index(std::string_view id) const {
  for (std::size_t i = 0; i < params_.vessels.size(); ++i) {
    if (params_.vessels[i].id == id) return static_cast<Eigen::Index>(i);
  }
  for (std::size_t i = 0; i < params_.chambers.size(); ++i) {
    if (params_.chambers[i].id == id) return static_cast<Eigen::Index>(params_.vessels.size() + i);
  }
  throw ConfigError("circulation", "unknown compartment '" + std::string(id) + "'");
}

const ActivationCurve& CirculationModule::activation(ActivationKind kind) const {
  return kind == ActivationKind::atrial ? atrial_ : ventricular_;
}

Eigen::VectorXd CirculationModule::pressures(double t, const Eigen::VectorXd& y, double scale, double abp) const {
  const double s_uniform = std::max(scale, params_.compliance_floor);
  Eigen::VectorXd p(compartments());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < params_.vessels.size(); ++i, ++k) {
    const Vessel& v = params_.vessels[i];
    const double s = factors_[i] * (scaled_[i] ? s_uniform : 1.0);
    const double stressed = y[k] - v.V_u;
    if (v.law == PvLaw::linear) {
      p[k] = stressed / (s * v.C);
    } else {
      p[k] = v.P0 * std::expm1(stressed / (s * v.C * (v.P_nom + v.P0)));
    }
  }
  for (const auto& c : params_.chambers) {
    p[k] = elastance(t, c, activation(c.kind)) * (y[k] - c.V_u);
    ++k;
  }
  if (params_.boundary == Boundary::abp_driven) p[aortic_root_] = abp;
  return p;
}

Eigen::VectorXd CirculationModule::valve_flows(const Eigen::VectorXd& p) const {
  Eigen::VectorXd q(static_cast<Eigen::Index>(valves_.size()));
  for (std::size_t i = 0; i < valves_.size(); ++i) {
    q[static_cast<Eigen::Index>(i)] = std::max(0.0, p[valves_[i].from] - p[valves_[i].to]) / valves_[i].R;
  }
  return q;
}

void CirculationModule::rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
                            Eigen::VectorXd& dydt) const {
  const double abp = inputs[1];
  const Eigen::VectorXd p = pressures(t, y, inputs[0], abp);
  dydt.setZero(y.size());
  for (const auto& r : resistors_) {
    const double q = (p[r.from] - p[r.to]) / r.R;
    dydt[r.from] -= q;
    dydt[r.to] += q;
  }
  for (const auto& l : inertial_) {
    const double q = y[l.state];
    dydt[l.state] = (p[l.from] - p[l.to] - l.R * q) / l.L;
    dydt[l.from] -= q;
    dydt[l.to] += q;
  }
  for (const auto& v : valves_) {
    const double q = std::max(0.0, p[v.from] - p[v.to]) / v.R;
    dydt[v.from] -= q;
    dydt[v.to] += q;
  }
  // With a prescribed root pressure the aortic compartment is an open boundary.
  if (params_.boundary == Boundary::abp_driven) dydt[aortic_root_] = 0.0;

  const auto& b = params_.baro;
  const double n = y[baro_];
  const double n_dot = y[baro_ + 1];
  dydt[baro_] = n_dot;
  dydt[baro_ + 1] = -2.0 * b.zeta * b.omega * n_dot - b.omega * b.omega * (n - b.set_point(abp));
}

void CirculationModule::switches(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::VectorXd p = pressures(t, y, inputs[0], inputs[1]);
  for (std::size_t i = 0; i < valves_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = p[valves_[i].from] - p[valves_[i].to];
  }
}

void CirculationModule::observe(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
                                Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::VectorXd p = pressures(t, y, inputs[0], inputs[1]);
  const Eigen::Index nc = p.size();
  const Eigen::Index nv = static_cast<Eigen::Index>(valves_.size());
  out.head(nc) = p;
  out.segment(nc, nv) = valve_flows(p);
  out[nc + nv] = inputs[1];
  out[nc + nv + 1] = inputs[2];
}

std::vector<double> CirculationModule::breakpoints(double t0, double t1) const {
  const double T = params_.period_s;
  std::vector<double> out;
  for (double shift : {0.0, params_.ventricular.shift, params_.atrial.shift}) {
    const double first = std::floor((t0 - shift * T) / T);
    for (double k = first;; k += 1.0) {
      const double b = (k + shift) * T;
      if (b >= t1) break;
      if (b > t0) out.push_back(b);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Signal builtin_abp(double period_s) {
  const double w = 2.0 * std::numbers::pi / period_s;
  auto shape = [w](double t) { return std::sin(w * t) + 0.35 * std::sin(2.0 * w * t + 0.6); };
  double lo = 1e300;
  double hi = -1e300;
  constexpr int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = shape(period_s * i / n);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = 40.0 / (hi - lo);
  const double offset = 80.0 - scale * lo;
  return Signal([shape, scale, offset](double t) { return std::clamp(scale * shape(t) + offset, 80.0, 120.0); },
                "mmHg");
}

Signal abp_from_samples(std::vector<double> time_s, std::vector<double> pressure_mmHg) {
  if (time_s.size() != pressure_mmHg.size() || time_s.size() < 2) {
    throw ConfigError("abp", "need at least two (time_s, pressure_mmHg) samples");
  }
  for (std::size_t i = 0; i < time_s.size(); ++i) {
    if (!std::isfinite(time_s[i]) || (i > 0 && !(time_s[i] > time_s[i - 1]))) {
      throw ConfigError("abp", "time_s must be strictly increasing", static_cast<int>(i) + 2);
    }
    if (!(pressure_mmHg[i] >= 40.0 && pressure_mmHg[i] <= 250.0)) {
      throw ConfigError("abp", "pressure outside the [40, 250] mmHg sanity band", static_cast<int>(i) + 2);
    }
  }
  auto t = std::make_shared<const std::vector<double>>(std::move(time_s));
  auto p = std::make_shared<const std::vector<double>>(std::move(pressure_mmHg));
  const double t0 = t->front();
  const double span = t->back() - t0;
  return Signal(
      [t, p, t0, span](double ts) {
        double u = std::fmod(ts - t0, span);
        if (u < 0.0) u += span;
        u += t0;
        auto it = std::upper_bound(t->begin(), t->end(), u);
        if (it == t->end()) return p->back();
        const auto i = static_cast<std::size_t>(it - t->begin()) - 1;
        const double w = (u - (*t)[i]) / ((*t)[i + 1] - (*t)[i]);
        return (1.0 - w) * (*p)[i] + w * (*p)[i + 1];
      },
      "mmHg");
}

PressureMetrics pressure_metrics(const TimeSeries& series, const std::string& compartment, double from_s) {
  const Eigen::VectorXd p = series.column("P_" + compartment);
  const Eigen::VectorXd off = series.has("pressure_offset") ? series.column("pressure_offset")
                                                            : Eigen::VectorXd::Zero(p.size());
  const Eigen::VectorXd& t = series.time();
  Eigen::Index first = 0;
  while (first < t.size() && t[first] < from_s) ++first;
  const Eigen::Index n = t.size() - first;
  if (n < 2) throw ConfigError("beats", "too few samples after the transient");
  const Eigen::VectorXd ps = p.tail(n);
  const Eigen::VectorXd os = off.tail(n);
  const Eigen::VectorXd centred = ps - (os.array() - os[0]).matrix();
  PressureMetrics m;
  m.mean = ps.mean() - os.mean();
  const double mu = centred.mean();
  m.sd = std::sqrt((centred.array() - mu).square().sum() / static_cast<double>(n));
  const Eigen::VectorXd hat = ps - os;
  m.min = hat.minCoeff();
  m.max = hat.maxCoeff();
  return m;
}

IntegratorConfig default_config(const IntegratorConfig& base) {
  IntegratorConfig cfg = base;
  cfg.max_step_s = std::min(cfg.max_step_s, 0.004);
  return cfg;
}

CirculationRun run_circulation(double compliance_scale, double offset_mmHg, int beats, int discard,
                               const CirculationParams& params, const IntegratorConfig& cfg, const Signal& abp) {
  if (beats < 1) throw ConfigError("beats", "must be >= 1");
  if (!(compliance_scale > 0.0 && compliance_scale <= 1.0)) {
    throw ConfigError("compliance_scale", "must lie in (0, 1]");
  }
  const CirculationModule module(params);
  const double T = params.period_s;
  const double t1 = beats * T;
  const std::vector<Signal> inputs{Signal::constant(compliance_scale, "1"), abp ? abp : builtin_abp(T),
                                   Signal::constant(offset_mmHg, "mmHg")};
  const auto grid = uniform_grid(0.0, t1, T / 200.0);
  CirculationRun run;
  run.series = integrate(module, 0.0, t1, inputs, default_config(cfg), grid);
  run.transient_s = std::min(discard, beats - 1) * T;
  return run;
}

}  // namespace compatient::circulation
