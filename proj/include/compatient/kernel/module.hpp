#pragma once

#include "compatient/kernel/signal.hpp"
#include "compatient/kernel/state.hpp"

#include <span>
#include <string>
#include <vector>

namespace compatient {

using Port = Variable;

/// A black-box ODE block. Inputs arrive as port values evaluated by the
/// kernel; they may change variables and parameters but never the state
/// layout, which is fixed at construction.
///
/// Each module integrates in its own time unit (hours for the biochemical
/// models, seconds for the circulation); `seconds_per_time_unit` converts.
class ModelModule {
 public:
  virtual ~ModelModule() = default;

  virtual const std::string& id() const = 0;
  virtual const StateLayout& layout() const = 0;
  virtual Eigen::VectorXd initial_state() const = 0;

  virtual std::vector<Port> input_ports() const { return {}; }

  /// Derived algebraic outputs sampled alongside the state (pressures, flows...).
  virtual std::vector<Variable> observables() const { return {}; }
  virtual void observe(double /*t*/, const Eigen::VectorXd& /*y*/, std::span<const double> /*inputs*/,
                       Eigen::Ref<Eigen::VectorXd> /*out*/) const {}

  /// State variables followed by observables.
  std::vector<Port> output_ports() const;

  virtual double seconds_per_time_unit() const { return 1.0; }

  /// Derivative in module time units. Must be deterministic.
  virtual void rhs(double t, const Eigen::VectorXd& y, std::span<const double> inputs, Eigen::VectorXd& dydt) const = 0;

  /// Instants in (t0, t1), module time units, where the rhs is discontinuous.
  virtual std::vector<double> breakpoints(double /*t0*/, double /*t1*/) const { return {}; }
  /// State-dependent switching functions (valve pressure differences...). The
  /// rhs may have a kink where one changes sign; adaptive methods end a step there.
  virtual Eigen::Index switch_count() const { return 0; }
  virtual void switches(double /*t*/, const Eigen::VectorXd& /*y*/, std::span<const double> /*inputs*/,
                        Eigen::Ref<Eigen::VectorXd> /*out*/) const {}
};

/// A block defined by closed-form expressions of time rather than an ODE
/// (the pharmacokinetic curve, the heparin decay). Its outputs are exact signals.
class SignalSource {
 public:
  virtual ~SignalSource() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<Port> output_ports() const = 0;
  virtual Signal signal(std::string_view port) const = 0;
};

}  // namespace compatient
