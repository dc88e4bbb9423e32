#pragma once

#include "compatient/kernel/module.hpp"
#include "compatient/kernel/state.hpp"

#include <array>
#include <string>

namespace compatient::pk {

/// Oral multiple-dose, one-compartment kinetics. Times in hours.
struct PkParams {
  double dose_mg = 0.0;
  double tau_h = 24.0;
  double k_a = 1.0;   // 1/h
  double k_e = 0.3;   // 1/h, before any renal reduction
  double F = 0.37;
  double V_L = 8.0;
  double doses_per_day = 1.0;  // 0 or 1
  double renal_factor = 0.5;   // k_e multiplier when renal_impaired
  bool renal_impaired = false;

  double elimination_rate() const { return renal_impaired ? k_e * renal_factor : k_e; }
  /// Throws ConfigError on out-of-domain values.
  void validate() const;
};

/// Tunable constants; the dose itself comes from the patient profile.
inline constexpr std::array<ParamField<PkParams>, 6> kParamFields{{
    {"tau", "h", &PkParams::tau_h},
    {"k_a", "1/h", &PkParams::k_a},
    {"k_e", "1/h", &PkParams::k_e},
    {"F", "1", &PkParams::F},
    {"V", "L", &PkParams::V_L},
    {"renal_factor", "1", &PkParams::renal_factor},
}};

/// Concentration (mg/L) at t_prime hours after the n-th of n equally spaced
/// doses. Falls back to the equal-rates limit when k_a and k_e nearly coincide.
double drug_concentration(const PkParams& p, int n, double t_prime_h);

/// Number of doses given up to and including time t (doses at 0, tau, 2 tau, ...).
int doses_given(const PkParams& p, double t_h, int max_doses);

/// Concentration at absolute time t_h for a regimen of `max_doses` doses.
double drug_at(const PkParams& p, double t_h, int max_doses);

/// Doses administered over a horizon: one per interval starting at t = 0.
int dose_count(const PkParams& p, double horizon_days);

/// Sampled concentration, column "drug" (mg/L), every dt_h hours.
TimeSeries drug_signal(const PkParams& p, double horizon_days, double dt_h = 0.1);

/// Closed-form source stage; output port "drug" in mg/L.
class DrugSource : public SignalSource {
 public:
  DrugSource(PkParams params, double horizon_days, std::string id = "pk");
  const std::string& id() const override { return id_; }
  std::vector<Port> output_ports() const override { return {{"drug", "mg/L"}}; }
  Signal signal(std::string_view port) const override;

  const PkParams& params() const { return params_; }

 private:
  PkParams params_;
  int doses_;
  std::string id_;
};

}  // namespace compatient::pk
