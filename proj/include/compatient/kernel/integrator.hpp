#pragma once

#include "compatient/kernel/module.hpp"
#include "compatient/kernel/signal.hpp"
#include "compatient/kernel/state.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace compatient {

enum class Method {
  adaptive_stiff,     ///< Rosenbrock 2(3), linearly implicit, L-stable
  adaptive_explicit,  ///< Dormand-Prince 5(4)
  fixed_rk4_oracle,   ///< classical RK4 at step max_step_s; reference only
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct IntegratorConfig {
  double rtol = 1e-6;
  double atol = 1e-9;
  double max_step_s = std::numeric_limits<double>::infinity();
  Method method = Method::adaptive_stiff;

  /// Throws ConfigError unless rtol, atol and max_step are positive (and
  /// max_step finite for the fixed-step oracle).
  void validate() const;
};

struct IntegrationStats {
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
};

struct IntegrateOptions {
  std::optional<Eigen::VectorXd> initial_state;  ///< defaults to module.initial_state()
  IntegrationStats* stats = nullptr;
};

/// t0, t0 + dt, ... up to and including t1.
std::vector<double> uniform_grid(double t0_s, double t1_s, double dt_s);

/// Integrates `module` over [t0_s, t1_s] and samples state plus observables at
/// `sample_times_s` (sorted, inside the interval). Adaptive methods keep the
/// local error of every accepted step below atol + rtol * |y| componentwise.
/// `inputs` are matched to module.input_ports() by position.
TimeSeries integrate(const ModelModule& module, double t0_s, double t1_s, std::span<const Signal> inputs,
                     const IntegratorConfig& cfg, std::span<const double> sample_times_s,
                     const IntegrateOptions& options = {});

}  // namespace compatient
