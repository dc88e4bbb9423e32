#pragma once

#include "compatient/kernel/integrator.hpp"
#include "compatient/kernel/module.hpp"

#include <string>
#include <vector>

namespace compatient::circulation {

enum class PvLaw { linear, exponential };
enum class Circuit { systemic, pulmonary, coronary };

/// Compliant vessel segment. Linear law: P = (V - V_u) / C. Exponential law:
/// P = P0 (exp((V - V_u) / V0) - 1) with V0 = C (P_nom + P0), so C is the
/// compliance at zero stressed volume scaled to the nominal operating point.
struct Vessel {
  std::string id;
  Circuit circuit;
  double C;      // mL/mmHg
  double V_u;    // mL
  double P_nom;  // mmHg, sets the initial volume
  PvLaw law = PvLaw::linear;
  double P0 = 0.0;  // mmHg, exponential law only
};

enum class ActivationKind { atrial, ventricular };

struct Chamber {
  std::string id;
  double E_min;  // mmHg/mL
  double E_max;
  double V_u;
  ActivationKind kind;
  double P_init;  // mmHg, end-diastolic pressure used for the initial volume
};

/// Pure resistance between two compartments.
struct Resistor {
  std::string from, to;
  double R;  // mmHg s/mL
};

/// Resistance in series with an inertance; the flow is a state variable.
struct InertialLink {
  std::string from, to;
  double L;  // mmHg s^2/mL
  double R;
  double q0;  // mL/s
};

/// One-way valve: flow max(0, P_from - P_to) / R.
struct Valve {
  std::string id, from, to;
  double R;
};

/// Double-Hill activation g1/(1+g1) * 1/(1+g2), g_k = (t/tau_k)^m_k,
/// normalized to a peak of 1. Times are fractions of the heart period.
struct Activation {
  double tau1, tau2, m1, m2;
  double shift = 0.0;  // onset within the beat
};

struct Baroreceptor {
  double zeta = 0.7;
  double omega = 6.283185307179586;  // rad/s
  double n0 = 40.0;    // Hz at p_ref
  double gain = 1.0;   // Hz/mmHg
  double p_ref = 100.0;  // mmHg

  double set_point(double p_mmHg) const;
};

enum class Boundary {
  closed_loop,  ///< left ventricle ejects into the proximal aorta compartment
  abp_driven,   ///< proximal aortic pressure is prescribed by the ABP input
};

struct CirculationParams {
  double period_s = 0.8;
  std::vector<Vessel> vessels;
  std::vector<Chamber> chambers;
  std::vector<Resistor> resistors;
  std::vector<InertialLink> inertial;
  std::vector<Valve> valves;
  Activation ventricular{0.215, 0.362, 1.32, 27.4, 0.0};
  Activation atrial{0.110, 0.180, 1.32, 13.1, 0.85};
  Baroreceptor baro;
  Boundary boundary = Boundary::closed_loop;
  bool scale_coronary = true;  ///< apply the compliance scale to coronary vessels
  double compliance_floor = 0.05;

  /// Healthy adult: 7 systemic, 5 pulmonary, 4 coronary segments, 4 chambers.
  static CirculationParams defaults();
  void validate() const;
};

/// Normalized activation in [0, 1] of a periodic phase.
class ActivationCurve {
 public:
  ActivationCurve(const Activation& a, double period_s);
  double operator()(double t_s) const;
  /// Time within the beat (seconds from the shifted onset) of the peak.
  double peak_time() const { return peak_time_; }

 private:
  double raw(double tt) const;
  Activation a_;
  double period_;
  double norm_ = 1.0;
  double peak_time_ = 0.0;
};

/// E_min + (E_max - E_min) a(t).
double elastance(double t_s, const Chamber& chamber, const ActivationCurve& activation);

/// Inputs: "compliance_scale" (applied to every scaled vessel), "abp" (mmHg,
/// drives the baroreceptor and, in abp_driven mode, the aortic root) and
/// "pressure_offset" (mmHg, reported alongside the raw pressures).
/// Works in seconds.
class CirculationModule : public ModelModule {
 public:
  explicit CirculationModule(CirculationParams params = CirculationParams::defaults(),
                             std::vector<double> vessel_factors = {}, std::string id = "circulation");

  const std::string& id() const override { return id_; }
  const StateLayout& layout() const override { return layout_; }
  Eigen::VectorXd initial_state() const override { return initial_; }
  std::vector<Port> input_ports() const override {
    return {{"compliance_scale", "1"}, {"abp", "mmHg"}, {"pressure_offset", "mmHg"}};
  }
  std::vector<compatient::Variable> observables() const override { return observables_; }
  void observe(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
               Eigen::Ref<Eigen::VectorXd> out) const override;
  void rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const override;
  std::vector<double> breakpoints(double t0, double t1) const override;
  /// Pressure difference across each valve.
  Eigen::Index switch_count() const override { return static_cast<Eigen::Index>(params_.valves.size()); }
  void switches(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
                Eigen::Ref<Eigen::VectorXd> out) const override;

  const CirculationParams& params() const { return params_; }
  void set_initial_state(Eigen::VectorXd y) { initial_ = std::move(y); }

  /// Pressures of all compartments (vessels then chambers, layout order).
  Eigen::VectorXd pressures(double t, const Eigen::VectorXd& y, double scale, double abp) const;
  /// Valve flows (mL/s), valve order.
  Eigen::VectorXd valve_flows(const Eigen::VectorXd& pressures) const;
  /// Number of compartments with a volume state.
  Eigen::Index compartments() const { return static_cast<Eigen::Index>(params_.vessels.size() + params_.chambers.size()); }
  Eigen::Index compartment_index(std::string_view id) const;
  const ActivationCurve& activation(ActivationKind kind) const;

 private:
  struct Link {
    Eigen::Index from, to;
    double R;
  };
  struct ILink {
    Eigen::Index from, to, state;
    double L, R;
  };

  CirculationParams params_;
  std::vector<double> factors_;  // per-vessel static compliance multipliers
  std::vector<bool> scaled_;
  std::string id_;
  StateLayout layout_;
  std::vector<compatient::Variable> observables_;
  Eigen::VectorXd initial_;
  ActivationCurve ventricular_;
  ActivationCurve atrial_;
  std::vector<Link> resistors_;
  std::vector<ILink> inertial_;
  std::vector<Link> valves_;
  Eigen::Index aortic_root_ = -1;
  Eigen::Index baro_ = -1;
};

/// Built-in arterial pressure waveform: two harmonics of the heart period,
/// rescaled to span exactly [80, 120] mmHg.
Signal builtin_abp(double period_s = 0.8);

/// Periodic signal from a recorded beat (time_s, pressure_mmHg), wrapped with
/// the record's span as period. Throws ConfigError outside [40, 250] mmHg.
Signal abp_from_samples(std::vector<double> time_s, std::vector<double> pressure_mmHg);

struct PressureMetrics {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Statistics of p_hat = p - offset over samples with t >= from_s. The
/// standard deviation is taken of p - (offset - offset[first]), so a constant
/// offset leaves it bit-identical to that of p.
PressureMetrics pressure_metrics(const TimeSeries& series, const std::string& compartment, double from_s);

struct CirculationRun {
  TimeSeries series;
  double transient_s = 0.0;  // metrics use t >= transient_s
};

/// Runs `beats` heart periods with a uniform compliance scale and constant
/// pressure offset, sampling every period/200. The first `discard` beats are
/// treated as transient.
CirculationRun run_circulation(double compliance_scale, double offset_mmHg, int beats, int discard = 10,
                               const CirculationParams& params = CirculationParams::defaults(),
                               const IntegratorConfig& cfg = {}, const Signal& abp = {});

/// Default solver settings for the cardiac stage (max step resolves valve events).
IntegratorConfig default_config(const IntegratorConfig& base);

}  // namespace compatient::circulation
