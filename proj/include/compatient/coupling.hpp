#pragma once

#include "compatient/kernel/integrator.hpp"
#include "compatient/kernel/module.hpp"

#include <array>

namespace compatient::coupling {

struct CouplingParams {
  double k_SARS = 0.12;  // per (1/h) of excess ACE2 activity, per hour
  double k_D = 1.0;      // 1/h per mg/L
  double k_G = 0.004;    // 1/h per mg/dL
  double k_eff = 0.1;    // 1/h
  double IR0 = 0.0;
  double beta0 = 1.1;
  double beta1 = 0.005;  // 1/year
  double beta_h = 1.6e-4;  // mmHg per U/mL
  double beta_D = 0.035;   // mmHg per ng/mL
  double D0 = 30.0;        // ng/mL
  double heparin_half_life_h = 1.5;
  double c_IR = 1.0;
  double compliance_floor = 0.05;
  double methylation_floor = 0.01;

  void validate() const;
};

inline constexpr std::array<ParamField<CouplingParams>, 14> kParamFields{{
    {"k_SARS", "1", &CouplingParams::k_SARS},
    {"k_D", "L/mg/h", &CouplingParams::k_D},
    {"k_G", "dL/mg/h", &CouplingParams::k_G},
    {"k_eff", "1/h", &CouplingParams::k_eff},
    {"IR0", "1", &CouplingParams::IR0},
    {"beta0", "1", &CouplingParams::beta0},
    {"beta1", "1/year", &CouplingParams::beta1},
    {"beta_h", "mmHg/(U/mL)", &CouplingParams::beta_h},
    {"beta_D", "mmHg/(ng/mL)", &CouplingParams::beta_D},
    {"D0", "ng/mL", &CouplingParams::D0},
    {"heparin_half_life", "h", &CouplingParams::heparin_half_life_h},
    {"c_IR", "1", &CouplingParams::c_IR},
    {"compliance_floor", "1", &CouplingParams::compliance_floor},
    {"methylation_floor", "1", &CouplingParams::methylation_floor},
}};

/// Rate of change of the inflammation score.
template <typename Scalar>
Scalar inflammation_rhs(const CouplingParams& p, const Scalar& IR, const Scalar& ace2_excess, const Scalar& drug,
                        const Scalar& G) {
  return p.k_SARS * ace2_excess + p.k_D * drug + p.k_G * G - p.k_eff * IR;
}

/// Fixed point of inflammation_rhs for constant inputs.
double ir_steady_state(const CouplingParams& p, double ace2_excess, double drug, double G);

/// beta0 - beta1 * age, clamped to (0, 1]; warns outside ages 20-70 and when
/// the floor is hit.
double methylation_factor(double age_years, const CouplingParams& p = {});

/// Multiplier alpha_MET * (1 - IR/100) applied to healthy compliances, floored
/// at compliance_floor with a warning.
double compliance_scale(double alpha_met, double IR, const CouplingParams& p = {});

inline double reduced_compliance(double C, double alpha_met, double IR, const CouplingParams& p = {}) {
  return compliance_scale(alpha_met, IR, p) * C;
}

/// Pressure shift (mmHg) subtracted from compartment pressures.
double treatment_offset(double heparin_U_mL, double vitamin_D_ng_mL, const CouplingParams& p = {});

/// Single-exponential decay from the initial dose.
double heparin_concentration(double heparin0_U_mL, double t_h, const CouplingParams& p = {});

/// Inflammation score ODE. Inputs: "ace2_excess" (1/h), "drug" (mg/L), "G" (mg/dL).
class InflammationModule : public ModelModule {
 public:
  explicit InflammationModule(CouplingParams params = {}, std::string id = "coupling");

  const std::string& id() const override { return id_; }
  const StateLayout& layout() const override { return layout_; }
  Eigen::VectorXd initial_state() const override { return Eigen::VectorXd::Constant(1, params_.IR0); }
  std::vector<Port> input_ports() const override { return {{"ace2_excess", "1/h"}, {"drug", "mg/L"}, {"G", "mg/dL"}}; }
  std::vector<Variable> observables() const override { return {{"Cyt", "1"}}; }
  void observe(double t, const Eigen::VectorXd& y, std::span<const double> inputs,
               Eigen::Ref<Eigen::VectorXd> out) const override;
  double seconds_per_time_unit() const override { return 3600.0; }
  void rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const override;

  const CouplingParams& params() const { return params_; }

 private:
  CouplingParams params_;
  std::string id_;
  StateLayout layout_;
};

/// Closed-form treatment signals on the circulation clock (seconds from the
/// start of the cardiac run): "heparin" (U/mL) and "pressure_offset" (mmHg).
class TreatmentSource : public SignalSource {
 public:
  TreatmentSource(double heparin0_U_mL, double vitamin_D_ng_mL, CouplingParams params = {},
                  std::string id = "treatment");
  const std::string& id() const override { return id_; }
  std::vector<Port> output_ports() const override { return {{"heparin", "U/mL"}, {"pressure_offset", "mmHg"}}; }
  Signal signal(std::string_view port) const override;

 private:
  double heparin0_;
  double vitamin_D_;
  CouplingParams params_;
  std::string id_;
};

}  // namespace compatient::coupling
