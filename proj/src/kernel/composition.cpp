#include "compatient/kernel/composition.hpp"
#include "compatient/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace compatient {

Endpoint Endpoint::parse(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size()) {
    throw WiringError("endpoint '" + dotted + "' is not of the form stage.port");
  }
  return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

std::vector<Port> CompositionGraph::Stage::inputs() const {
  return module ? module->input_ports() : std::vector<Port>{};
}

std::vector<Port> CompositionGraph::Stage::outputs() const {
  return module ? module->output_ports() : source->output_ports();
}

void CompositionGraph::add(std::shared_ptr<const ModelModule> module, StageOptions options) {
  if (!module) throw WiringError("null module");
  if (!stages_.emplace(module->id(), Stage{module, nullptr, std::move(options)}).second) {
    throw WiringError("duplicate stage '" + module->id() + "'");
  }
}

void CompositionGraph::add(std::shared_ptr<const SignalSource> source, StageOptions options) {
  if (!source) throw WiringError("null source");
  if (!stages_.emplace(source->id(), Stage{nullptr, source, std::move(options)}).second) {
    throw WiringError("duplicate stage '" + source->id() + "'");
  }
}

void CompositionGraph::connect(Wire wire) { wires_.push_back(std::move(wire)); }

void CompositionGraph::bind(const Endpoint& target, Signal signal) { bindings_[target.str()] = std::move(signal); }

const CompositionGraph::Stage& CompositionGraph::stage(const std::string& id) const {
  auto it = stages_.find(id);
  if (it == stages_.end()) throw WiringError("unknown stage '" + id + "'");
  return it->second;
}

namespace {

const Port* find_port(const std::vector<Port>& ports, const std::string& name) {
  for (const auto& p : ports) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool is_summary(WireMode m) { return m == WireMode::max || m == WireMode::mean || m == WireMode::last; }

}  // namespace

void CompositionGraph::validate() const {
  std::set<std::string> fed;
  for (const auto& w : wires_) {
    const Stage& src = stage(w.source.stage);
    const Stage& dst = stage(w.target.stage);
    const auto outs = src.outputs();
    const auto ins = dst.inputs();
    const Port* out = find_port(outs, w.source.port);
    const Port* in = find_port(ins, w.target.port);
    if (!out) throw WiringError("stage '" + w.source.stage + "' has no output '" + w.source.port + "'");
    if (!in) throw WiringError("stage '" + w.target.stage + "' has no input '" + w.target.port + "'");
    const std::string& unit = w.transform ? w.transform->unit : out->unit;
    if (unit != in->unit) {
      throw UnitMismatch("wire " + w.source.str() + " -> " + w.target.str() + ": unit '" + unit + "' vs '" +
                         in->unit + "'");
    }
    if (!w.windows_s.empty() && !is_summary(w.mode)) {
      throw WiringError("wire " + w.source.str() + " -> " + w.target.str() + ": windows need a summary mode");
    }
    if (!fed.insert(w.target.str()).second) throw WiringError("input " + w.target.str() + " is wired twice");
  }
  for (const auto& [key, sig] : bindings_) {
    const Endpoint e = Endpoint::parse(key);
    const auto ins = stage(e.stage).inputs();
    const Port* in = find_port(ins, e.port);
    if (!in) throw WiringError("stage '" + e.stage + "' has no input '" + e.port + "'");
    if (sig.unit() != in->unit) {
      throw UnitMismatch("binding " + key + ": unit '" + sig.unit() + "' vs '" + in->unit + "'");
    }
    if (!fed.insert(key).second) throw WiringError("input " + key + " is both wired and bound");
  }
  for (const auto& [id, st] : stages_) {
    for (const auto& p : st.inputs()) {
      if (!fed.count(id + "." + p.name)) throw WiringError("input " + id + "." + p.name + " is not connected");
    }
  }
}

std::vector<std::string> CompositionGraph::solve_order() const {
  std::map<std::string, std::set<std::string>> downstream;
  std::map<std::string, int> indegree;
  for (const auto& [id, st] : stages_) indegree[id] = 0;
  for (const auto& w : wires_) {
    stage(w.source.stage);
    stage(w.target.stage);
    if (downstream[w.source.stage].insert(w.target.stage).second) ++indegree[w.target.stage];
  }
  std::set<std::string> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    const std::string id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (const auto& next : downstream[id]) {
      if (--indegree[next] == 0) ready.insert(next);
    }
  }
  if (order.size() != stages_.size()) {
    std::string members;
    for (const auto& [id, deg] : indegree) {
      if (deg > 0) members += (members.empty() ? "" : ", ") + id;
    }
    throw CycleDetected("stage graph has a cycle through: " + members);
  }
  return order;
}

double summarize(const TimeSeries& series, const std::string& column, WireMode mode,
                 const std::vector<std::pair<double, double>>& windows_s) {
  const Eigen::VectorXd y = series.column(column);
  const Eigen::VectorXd& t = series.time();
  std::vector<double> picked;
  picked.reserve(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    bool inside = windows_s.empty();
    for (const auto& [from, to] : windows_s) {
      if (t[i] >= from && t[i] <= to) {
        inside = true;
        break;
      }
    }
    if (inside) picked.push_back(y[i]);
  }
  if (picked.empty()) throw WiringError("summary of '" + column + "' has no samples in its windows");
  switch (mode) {
    case WireMode::max:
      return *std::max_element(picked.begin(), picked.end());
    case WireMode::mean: {
      double sum = 0.0;
      for (double v : picked) sum += v;
      return sum / static_cast<double>(picked.size());
    }
    case WireMode::last:
      return picked.back();
    default:
      throw WiringError("summarize: not a summary mode");
  }
}

std::map<std::string, TimeSeries> compose(const CompositionGraph& graph, double horizon_s,
                                          const IntegratorConfig& cfg) {
  graph.validate();
  const auto order = graph.solve_order();
  std::map<std::string, TimeSeries> results;
  // Exact signals of closed-form stages, so wires from them skip resampling.
  std::map<std::string, const SignalSource*> sources;

  auto input_signal = [&](const std::string& stage_id, const Port& port) -> Signal {
    const std::string key = stage_id + "." + port.name;
    if (auto it = graph.bindings_.find(key); it != graph.bindings_.end()) return it->second;
    for (const auto& w : graph.wires_) {
      if (w.target.stage != stage_id || w.target.port != port.name) continue;
      Signal sig;
      if (is_summary(w.mode)) {
        const TimeSeries& up = results.at(w.source.stage);
        sig = Signal::constant(summarize(up, w.source.port, w.mode, w.windows_s), up.variable(w.source.port).unit);
      } else if (auto src = sources.find(w.source.stage); src != sources.end()) {
        sig = src->second->signal(w.source.port);
      } else {
        const Interpolation mode = w.mode == WireMode::linear ? Interpolation::linear : Interpolation::sample_hold;
        sig = Signal::from_series(results.at(w.source.stage), w.source.port, mode);
      }
      if (w.transform) sig = sig.affine(w.transform->scale, w.transform->offset, w.transform->unit);
      return sig;
    }
    throw WiringError("input " + key + " is not connected");
  };

  for (const auto& id : order) {
    const auto& st = graph.stage(id);
    const double t1 = st.options.horizon_s > 0.0 ? st.options.horizon_s : horizon_s;
    if (!(t1 > 0.0)) throw WiringError("stage '" + id + "' has a nonpositive horizon");
    const double dt = st.options.sample_dt_s > 0.0 ? st.options.sample_dt_s : t1 / 200.0;
    const auto grid = uniform_grid(0.0, t1, dt);

    if (st.source) {
      const auto ports = st.source->output_ports();
      std::vector<Signal> signals;
      for (const auto& p : ports) signals.push_back(st.source->signal(p.name));
      Eigen::MatrixXd values(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(ports.size()));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < ports.size(); ++j) {
          values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = signals[j](grid[i]);
        }
      }
      results.emplace(id, TimeSeries(ports, Eigen::Map<const Eigen::VectorXd>(grid.data(), static_cast<Eigen::Index>(grid.size())), std::move(values)));
      sources.emplace(id, st.source.get());
      continue;
    }

    std::vector<Signal> inputs;
    for (const auto& port : st.module->input_ports()) inputs.push_back(input_signal(id, port));
    IntegrateOptions opts;
    opts.initial_state = st.options.initial_state;
    results.emplace(id, integrate(*st.module, 0.0, t1, inputs, st.options.config.value_or(cfg), grid, opts));
  }
  return results;
}

}  // namespace compatient
