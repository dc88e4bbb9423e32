#include "compatient/ras.hpp"
#include "compatient/diagnostics.hpp"
#include "compatient/errors.hpp"

namespace compatient::ras {

void RasParams::validate() const {
  for (const auto& f : kParamFields) {
    const double v = this->*(f.member);
    if (!std::isfinite(v) || v < 0.0) throw ConfigError(std::string("ras.") + f.name, "must be finite and >= 0");
  }
  for (double h : {h_ren, h_ANGI, h_ANGII, h_ANG17, h_AT1R, h_AT2R, IC50}) {
    if (!(h > 0.0)) throw ConfigError("ras", "half-lives and IC50 must be > 0");
  }
}

Eigen::VectorXd equilibrium(const RasParams& p, double G, double drug) {
  constexpr Eigen::Index n = K_ACE2;  // the six cascade species
  const InfectionStatus off{};
  Eigen::VectorXd y = Eigen::VectorXd::Zero(kSpeciesCount);
  y[K_ACE2] = p.k_ACE2_0;
  Eigen::VectorXd f0;
  ras_rhs<double>(p, off, 0.0, y, G, drug, f0);
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd f;
  for (Eigen::Index j = 0; j < n; ++j) {
    y[j] = 1.0;
    ras_rhs<double>(p, off, 0.0, y, G, drug, f);
    a.col(j) = (f - f0).head(n);
    y[j] = 0.0;
  }
  y.head(n) = a.partialPivLu().solve(-f0.head(n));
  return y;
}

double at1r_equilibrium(const RasParams& p, double G, double angII) {
  return at1r_rate(p, G) * angII * p.h_AT1R / std::numbers::ln2;
}

RasModule::RasModule(RasParams params, InfectionStatus infection, std::string id)
    : params_(params),
      infection_(infection),
      id_(std::move(id)),
      layout_({{"Renin", "pmol/L"},
               {"ANGI", "pmol/L"},
               {"ANGII", "pmol/L"},
               {"ANG17", "pmol/L"},
               {"AT1R", "pmol/L"},
               {"AT2R", "pmol/L"},
               {"k_ACE2", "1/h"}}) {
  params_.validate();
  initial_ = equilibrium(params_, kReferenceGlucose);
}

void RasModule::rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const {
  ras_rhs<double>(params_, infection_, t, y, inputs[0], inputs[1], dydt);
}

std::vector<double> RasModule::breakpoints(double t0, double t1) const {
  if (infection_.infected && infection_.onset_h > t0 && infection_.onset_h < t1) return {infection_.onset_h};
  return {};
}

TimeSeries run_ras(double G_const, const Signal& drug, const InfectionStatus& infection, double horizon_days,
                   const RasParams& params, const IntegratorConfig& cfg, double dt_h) {
  if (G_const < 100.0 || G_const > 200.0) {
    warn("ras: constant glucose " + std::to_string(G_const) + " mg/dL is outside [100, 200]");
  }
  const RasModule module(params, infection);
  const double t1 = horizon_days * 86400.0;
  const std::vector<Signal> inputs{Signal::constant(G_const, "mg/dL"), drug};
  const auto grid = uniform_grid(0.0, t1, dt_h * 3600.0);
  return integrate(module, 0.0, t1, inputs, cfg, grid);
}

}  // namespace compatient::ras
