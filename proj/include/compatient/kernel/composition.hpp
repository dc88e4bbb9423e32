#pragma once

#include "compatient/kernel/integrator.hpp"
#include "compatient/kernel/module.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace compatient {

/// How a wire turns the upstream trajectory into a downstream input signal.
enum class WireMode {
  sample_hold,  ///< piecewise constant between upstream samples
  linear,       ///< linear interpolation between upstream samples
  max,          ///< constant: maximum over the (windowed) samples
  mean,         ///< constant: arithmetic mean over the (windowed) samples
  last,         ///< constant: final sample
};

struct Affine {
  double scale = 1.0;
  double offset = 0.0;
  std::string unit;  ///< unit after the transform
};

/// "stage.port" endpoint.
struct Endpoint {
  std::string stage;
  std::string port;

  static Endpoint parse(const std::string& dotted);
  std::string str() const { return stage + "." + port; }
};

struct Wire {
  Endpoint source;
  Endpoint target;
  WireMode mode = WireMode::sample_hold;
  std::optional<Affine> transform;
  /// Summary modes only: restrict to samples inside these [from, to] windows (seconds).
  std::vector<std::pair<double, double>> windows_s;
};

struct StageOptions {
  double horizon_s = 0.0;  ///< 0: use the horizon passed to compose()
  double sample_dt_s = 0.0;  ///< 0: 200 samples over the horizon
  std::optional<IntegratorConfig> config;  ///< overrides the graph-level config
  std::optional<Eigen::VectorXd> initial_state;
};

/// Stages (ODE modules or closed-form sources) connected by wires. Stages
/// are solved one after another in a topological order of the wire DAG;
/// ties are broken by stage id, so declaration order never matters.
class CompositionGraph {
 public:
  void add(std::shared_ptr<const ModelModule> module, StageOptions options = {});
  void add(std::shared_ptr<const SignalSource> source, StageOptions options = {});
  void connect(Wire wire);
  /// Feeds an input port from a signal defined outside the graph.
  void bind(const Endpoint& target, Signal signal);

  /// Checks ports, units and input coverage; throws WiringError/UnitMismatch.
  void validate() const;
  /// Throws CycleDetected when the wires do not form a DAG.
  std::vector<std::string> solve_order() const;

  bool has_stage(const std::string& id) const { return stages_.count(id) != 0; }
  const std::vector<Wire>& wires() const { return wires_; }

 private:
  friend std::map<std::string, TimeSeries> compose(const CompositionGraph&, double, const IntegratorConfig&);

  struct Stage {
    std::shared_ptr<const ModelModule> module;
    std::shared_ptr<const SignalSource> source;
    StageOptions options;
    std::vector<Port> inputs() const;
    std::vector<Port> outputs() const;
  };

  const Stage& stage(const std::string& id) const;
  std::map<std::string, Stage> stages_;
  std::vector<Wire> wires_;
  std::map<std::string, Signal> bindings_;  // key: endpoint string
};

/// Integrates every stage over its own horizon, in solve order, feeding each
/// downstream input from its wire or binding. Deterministic: identical
/// graphs give bit-identical results.
std::map<std::string, TimeSeries> compose(const CompositionGraph& graph, double horizon_s,
                                          const IntegratorConfig& cfg);

/// Collapses a column to one number per the summary modes of WireMode.
double summarize(const TimeSeries& series, const std::string& column, WireMode mode,
                 const std::vector<std::pair<double, double>>& windows_s = {});

}  // namespace compatient
