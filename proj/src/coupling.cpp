#include "compatient/coupling.hpp"
#include "compatient/diagnostics.hpp"
#include "compatient/errors.hpp"

#include <cmath>
#include <numbers>

namespace compatient::coupling {

void CouplingParams::validate() const {
  for (const auto& f : kParamFields) {
    const double v = this->*(f.member);
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("coupling.") + f.name, "must be finite and >= 0");
  }
  if (!(beta0 > 0.0)) throw ConfigError("coupling.beta0", "must be > 0");
  if (!(k_eff > 0.0)) throw ConfigError("coupling.k_eff", "must be > 0");
  if (!(heparin_half_life_h > 0.0)) throw ConfigError("coupling.heparin_half_life", "must be > 0");
  if (!(compliance_floor > 0.0 && compliance_floor <= 1.0)) {
    throw ConfigError("coupling.compliance_floor", "must lie in (0, 1]");
  }
  if (!(methylation_floor > 0.0 && methylation_floor <= 1.0)) {
    throw ConfigError("coupling.methylation_floor", "must lie in (0, 1]");
  }
}

double ir_steady_state(const CouplingParams& p, double ace2_excess, double drug, double G) {
  return (p.k_SARS * ace2_excess + p.k_D * drug + p.k_G * G) / p.k_eff;
}

double methylation_factor(double age_years, const CouplingParams& p) {
  if (age_years < 20.0 || age_years > 70.0) {
    warn("coupling: age " + std::to_string(age_years) + " is outside [20, 70]");
  }
  const double a = p.beta0 - p.beta1 * age_years;
  if (a <= 0.0) {
    warn("coupling: methylation factor is nonpositive at age " + std::to_string(age_years) + ", clamped to " +
         std::to_string(p.methylation_floor));
    return p.methylation_floor;
  }
  return std::min(a, 1.0);
}

double compliance_scale(double alpha_met, double IR, const CouplingParams& p) {
  if (IR >= 100.0) warn("coupling: inflammation score " + std::to_string(IR) + " >= 100");
  const double s = alpha_met * (1.0 - IR / 100.0);
  if (s < p.compliance_floor) {
    warn("coupling: compliance scale " + std::to_string(s) + " clamped to " + std::to_string(p.compliance_floor));
    return p.compliance_floor;
  }
  return s;
}

double treatment_offset(double heparin_U_mL, double vitamin_D_ng_mL, const CouplingParams& p) {
  if (heparin_U_mL < 0.0) throw ConfigError("heparin", "must be >= 0");
  return p.beta_h * heparin_U_mL + p.beta_D * (vitamin_D_ng_mL - p.D0);
}

double heparin_concentration(double heparin0_U_mL, double t_h, const CouplingParams& p) {
  return heparin0_U_mL * std::exp(-std::numbers::ln2 * t_h / p.heparin_half_life_h);
}

InflammationModule::InflammationModule(CouplingParams params, std::string id)
    : params_(params), id_(std::move(id)), layout_(std::vector<Variable>{{"IR", "1"}}) {
  params_.validate();
}

void InflammationModule::rhs(double, const Eigen::VectorXd& y, std::span<const double> inputs,
                             Eigen::VectorXd& dydt) const {
  dydt.resize(1);
  dydt[0] = inflammation_rhs<double>(params_, y[0], inputs[0], inputs[1], inputs[2]);
  // The score cannot go below zero even if the excess ACE2 input turns negative.
  if (y[0] <= 0.0 && dydt[0] < 0.0) dydt[0] = 0.0;
}

void InflammationModule::observe(double, const Eigen::VectorXd& y, std::span<const double>,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  out[0] = params_.c_IR * y[0];
}

TreatmentSource::TreatmentSource(double heparin0_U_mL, double vitamin_D_ng_mL, CouplingParams params, std::string id)
    : heparin0_(heparin0_U_mL), vitamin_D_(vitamin_D_ng_mL), params_(params), id_(std::move(id)) {
  params_.validate();
  if (heparin0_ < 0.0) throw ConfigError("heparin_0", "must be >= 0");
  if (vitamin_D_ < 0.0) throw ConfigError("vitamin_D", "must be >= 0");
}

Signal TreatmentSource::signal(std::string_view port) const {
  const CouplingParams p = params_;
  const double h0 = heparin0_;
  const double d = vitamin_D_;
  if (port == "heparin") {
    return Signal([p, h0](double t_s) { return heparin_concentration(h0, std::max(t_s, 0.0) / 3600.0, p); }, "U/mL");
  }
  if (port == "pressure_offset") {
    return Signal(
        [p, h0, d](double t_s) {
          return treatment_offset(heparin_concentration(h0, std::max(t_s, 0.0) / 3600.0, p), d, p);
        },
        "mmHg");
  }
  throw WiringError("treatment source has no port '" + std::string(port) + "'");
}

}  // namespace compatient::coupling
