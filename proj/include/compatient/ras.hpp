#pragma once

#include "compatient/kernel/integrator.hpp"
#include "compatient/kernel/module.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace compatient::ras {

/// Peptide cascade and receptor-binding constants. Concentrations in pmol/L,
/// rates in 1/h, half-lives in hours, glucose in mg/dL, drug in mg/L.
struct RasParams {
  double beta = 3692.0;  // renin production, pmol/L/h
  double h_ren = 0.2;
  double k_ren = 10.0;  // ANG I produced per renin, 1/h
  double h_ANGI = 0.5 / 60.0;
  double h_ANGII = 0.66 / 60.0;
  double h_ANG17 = 0.5 / 60.0;
  double h_AT1R = 0.2;
  double h_AT2R = 0.2;
  double a_ACE = 0.1;  // 1/h per mg/dL
  double b_ACE = 27.4;
  double k_NEP = 30.8;
  double a_AT1R = 0.005;  // 1/h per mg/dL
  double b_AT1R = 1.32;
  double k_AT2R = 0.63;
  double k_ACE2_0 = 30.0;
  double s_V = 0.2;   // 1/h per pmol/L
  double e_AI = 0.1;  // 1/h
  double IC50 = 0.02;  // mg/L

  void validate() const;
};

inline constexpr std::array<ParamField<RasParams>, 18> kParamFields{{
    {"beta", "pmol/L/h", &RasParams::beta},
    {"h_ren", "h", &RasParams::h_ren},
    {"k_ren", "1/h", &RasParams::k_ren},
    {"h_ANGI", "h", &RasParams::h_ANGI},
    {"h_ANGII", "h", &RasParams::h_ANGII},
    {"h_ANG17", "h", &RasParams::h_ANG17},
    {"h_AT1R", "h", &RasParams::h_AT1R},
    {"h_AT2R", "h", &RasParams::h_AT2R},
    {"a_ACE", "1/h/(mg/dL)", &RasParams::a_ACE},
    {"b_ACE", "1/h", &RasParams::b_ACE},
    {"k_NEP", "1/h", &RasParams::k_NEP},
    {"a_AT1R", "1/h/(mg/dL)", &RasParams::a_AT1R},
    {"b_AT1R", "1/h", &RasParams::b_AT1R},
    {"k_AT2R", "1/h", &RasParams::k_AT2R},
    {"k_ACE2_0", "1/h", &RasParams::k_ACE2_0},
    {"s_V", "L/pmol/h", &RasParams::s_V},
    {"e_AI", "1/h", &RasParams::e_AI},
    {"IC50", "mg/L", &RasParams::IC50},
}};

struct InfectionStatus {
  bool infected = false;
  double onset_h = 0.0;
};

enum Species : Eigen::Index { Renin, ANGI, ANGII, ANG17, AT1R, AT2R, K_ACE2, kSpeciesCount };

template <typename Scalar>
Scalar ace_rate(const RasParams& p, const Scalar& G) {
  return p.a_ACE * G + p.b_ACE;
}

template <typename Scalar>
Scalar at1r_rate(const RasParams& p, const Scalar& G) {
  return p.a_AT1R * G + p.b_AT1R;
}

template <typename Scalar>
Scalar inhibition(const RasParams& p, const Scalar& drug) {
  return Scalar(1) / (Scalar(1) + drug / p.IC50);
}

/// Cascade plus the four extension equations. t in hours.
template <typename Scalar>
void ras_rhs(const RasParams& p, const InfectionStatus& infection, double t_h, const Vector<Scalar>& y,
             const Scalar& G, const Scalar& drug, Vector<Scalar>& dy) {
  using std::numbers::ln2;
  dy.resize(kSpeciesCount);
  const Scalar k_ace = ace_rate(p, G) * inhibition(p, drug);
  const Scalar k_at1r = at1r_rate(p, G);
  const Scalar& k_ace2 = y[K_ACE2];
  dy[Renin] = p.beta - (ln2 / p.h_ren) * y[Renin];
  dy[ANGI] = p.k_ren * y[Renin] - (k_ace + p.k_NEP) * y[ANGI] - (ln2 / p.h_ANGI) * y[ANGI];
  dy[ANGII] = k_ace * y[ANGI] - (k_ace2 + k_at1r + p.k_AT2R) * y[ANGII] - (ln2 / p.h_ANGII) * y[ANGII];
  dy[ANG17] = p.k_NEP * y[ANGI] + k_ace2 * y[ANGII] - (ln2 / p.h_ANG17) * y[ANG17];
  dy[AT1R] = k_at1r * y[ANGII] - (ln2 / p.h_AT1R) * y[AT1R];
  dy[AT2R] = p.k_AT2R * y[ANGII] - (ln2 / p.h_AT2R) * y[AT2R];
  if (infection.infected && t_h >= infection.onset_h) {
    dy[K_ACE2] = p.s_V * y[ANGII] - p.e_AI * k_ace2;
  } else {
    dy[K_ACE2] = Scalar(0);
  }
}

/// Fixed point at constant G and drug with k_ACE2 held at k_ACE2_0 (the
/// cascade is linear there, so this is a single linear solve).
Eigen::VectorXd equilibrium(const RasParams& p, double G, double drug = 0.0);

/// [AT1R] root of its own equation at fixed G and [ANGII].
double at1r_equilibrium(const RasParams& p, double G, double angII);

/// Inputs: "G" (mg/dL), "drug" (mg/L). Works in hours.
class RasModule : public ModelModule {
 public:
  explicit RasModule(RasParams params = {}, InfectionStatus infection = {}, std::string id = "ras");

  const std::string& id() const override { return id_; }
  const StateLayout& layout() const override { return layout_; }
  Eigen::VectorXd initial_state() const override { return initial_; }
  std::vector<Port> input_ports() const override { return {{"G", "mg/dL"}, {"drug", "mg/L"}}; }
  double seconds_per_time_unit() const override { return 3600.0; }
  void rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const override;
  std::vector<double> breakpoints(double t0, double t1) const override;

  const RasParams& params() const { return params_; }
  void set_initial_state(Eigen::VectorXd y) { initial_ = std::move(y); }

 private:
  RasParams params_;
  InfectionStatus infection_;
  std::string id_;
  StateLayout layout_;
  Eigen::VectorXd initial_;
};

/// Simulates the cascade at constant glucose with the given drug input,
/// starting from the healthy equilibrium (G = 108, no drug). Samples every dt_h.
TimeSeries run_ras(double G_const, const Signal& drug, const InfectionStatus& infection, double horizon_days,
                   const RasParams& params = {}, const IntegratorConfig& cfg = {}, double dt_h = 0.1);

inline constexpr double kReferenceGlucose = 108.0;

}  // namespace compatient::ras
