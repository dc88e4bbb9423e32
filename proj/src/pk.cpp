#include "compatient/pk.hpp"
#include "compatient/errors.hpp"

#include <algorithm>
#include <cmath>

namespace compatient::pk {

void PkParams::validate() const {
  if (!(dose_mg >= 0.0)) throw ConfigError("pk.dose", "dose must be >= 0");
  if (!(tau_h > 0.0)) throw ConfigError("pk.tau", "dosing interval must be > 0");
  if (!(k_a > 0.0)) throw ConfigError("pk.k_a", "absorption rate must be > 0");
  if (!(k_e > 0.0)) throw ConfigError("pk.k_e", "elimination rate must be > 0");
  if (!(F >= 0.0 && F <= 1.0)) throw ConfigError("pk.F", "absorbed fraction must lie in [0, 1]");
  if (!(V_L > 0.0)) throw ConfigError("pk.V", "volume of distribution must be > 0");
  if (doses_per_day != 0.0 && doses_per_day != 1.0) throw ConfigError("doses_per_day", "must be 0 or 1");
  if (!(renal_factor > 0.0 && renal_factor <= 1.0)) {
    throw ConfigError("pk.renal_factor", "renal factor must lie in (0, 1]");
  }
}

namespace {

// (1 - r^n) / (1 - r) with r = exp(-k tau), accurate for small k tau.
double accumulation(double k, double tau, int n) {
  return std::expm1(-n * k * tau) / std::expm1(-k * tau);
}

}  // namespace

double drug_concentration(const PkParams& p, int n, double t_prime_h) {
  if (n < 1) throw std::invalid_argument("drug_concentration: n must be >= 1");
  if (p.dose_mg == 0.0) return 0.0;
  const double ka = p.k_a;
  const double ke = p.elimination_rate();
  const double tau = p.tau_h;
  const double t = t_prime_h;
  double c;
  if (std::abs(ka - ke) <= 1e-8 * std::max(ka, ke)) {
    // Limit ka -> ke of the superposed t e^{-kt} single-dose curves.
    const double k = 0.5 * (ka + ke);
    const double r = std::exp(-k * tau);
    const double rn = std::pow(r, n);
    const double sum_j = accumulation(k, tau, n);
    const double sum_jr = r * (1.0 - n * std::pow(r, n - 1) + (n - 1) * rn) / ((1.0 - r) * (1.0 - r));
    c = p.dose_mg * p.F * k / p.V_L * std::exp(-k * t) * (t * sum_j + tau * sum_jr);
  } else {
    const double scale = p.dose_mg * ka * p.F / ((ka - ke) * p.V_L);
    c = scale * (accumulation(ke, tau, n) * std::exp(-ke * t) - accumulation(ka, tau, n) * std::exp(-ka * t));
  }
  return std::max(0.0, c);
}

int doses_given(const PkParams& p, double t_h, int max_doses) {
  if (t_h < 0.0 || max_doses <= 0) return 0;
  const auto k = static_cast<int>(std::floor(t_h / p.tau_h)) + 1;
  return std::min(k, max_doses);
}

double drug_at(const PkParams& p, double t_h, int max_doses) {
  const int n = doses_given(p, t_h, max_doses);
  if (n == 0) return 0.0;
  return drug_concentration(p, n, t_h - (n - 1) * p.tau_h);
}

int dose_count(const PkParams& p, double horizon_days) {
  if (p.doses_per_day == 0.0 || p.dose_mg == 0.0 || horizon_days <= 0.0) return 0;
  return static_cast<int>(std::ceil(horizon_days * 24.0 / p.tau_h - 1e-12));
}

TimeSeries drug_signal(const PkParams& p, double horizon_days, double dt_h) {
  p.validate();
  if (horizon_days < 0.0) throw ConfigError("horizon_days", "must be >= 0");
  const int doses = dose_count(p, horizon_days);
  const double end_h = horizon_days * 24.0;
  const auto n = static_cast<Eigen::Index>(std::floor(end_h / dt_h + 1e-9)) + 1;
  Eigen::VectorXd time(n);
  Eigen::MatrixXd values(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t_h = static_cast<double>(i) * dt_h;
    time[i] = t_h * 3600.0;
    values(i, 0) = drug_at(p, t_h, doses);
  }
  return TimeSeries({{"drug", "mg/L"}}, std::move(time), std::move(values));
}

DrugSource::DrugSource(PkParams params, double horizon_days, std::string id)
    : params_(params), doses_(dose_count(params, horizon_days)), id_(std::move(id)) {
  params_.validate();
}

Signal DrugSource::signal(std::string_view port) const {
  if (port != "drug") throw WiringError("pk source has no port '" + std::string(port) + "'");
  std::vector<double> kinks;
  for (int k = 1; k < doses_; ++k) kinks.push_back(k * params_.tau_h * 3600.0);
  const PkParams p = params_;
  const int doses = doses_;
  return Signal([p, doses](double t_s) { return drug_at(p, t_s / 3600.0, doses); }, "mg/L",
                -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), std::move(kinks));
}

}  // namespace compatient::pk
