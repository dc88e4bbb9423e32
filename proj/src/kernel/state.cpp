#include "compatient/kernel/state.hpp"
#include "compatient/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace compatient {

StateLayout::StateLayout(std::vector<Variable> variables) : variables_(std::move(variables)) {
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (!seen.insert(v.name).second) throw std::invalid_argument("duplicate state variable '" + v.name + "'");
  }
}

Eigen::Index StateLayout::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return static_cast<Eigen::Index>(i);
  }
  return -1;
}

Eigen::Index StateLayout::index_of(std::string_view name) const {
  const auto i = find(name);
  if (i < 0) throw std::out_of_range("no state variable '" + std::string(name) + "'");
  return i;
}

TimeSeries::TimeSeries(std::vector<Variable> columns, Eigen::VectorXd time_s, Eigen::MatrixXd values)
    : columns_(std::move(columns)), time_(std::move(time_s)), values_(std::move(values)) {
  if (values_.rows() != time_.size() || values_.cols() != static_cast<Eigen::Index>(columns_.size())) {
    throw std::invalid_argument("TimeSeries: shape does not match columns/time");
  }
}

bool TimeSeries::has(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Variable& v) { return v.name == name; });
}

Eigen::Index TimeSeries::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return static_cast<Eigen::Index>(i);
  }
  throw std::out_of_range("TimeSeries has no column '" + std::string(name) + "'");
}

Eigen::VectorXd TimeSeries::column(std::string_view name) const { return values_.col(column_index(name)); }

const Variable& TimeSeries::variable(std::string_view name) const {
  return columns_[static_cast<std::size_t>(column_index(name))];
}

TimeSeries TimeSeries::slice(double from_s, double to_s) const {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < time_.size(); ++i) {
    if (time_[i] >= from_s && time_[i] <= to_s) rows.push_back(i);
  }
  Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    t[static_cast<Eigen::Index>(k)] = time_[rows[k]];
    v.row(static_cast<Eigen::Index>(k)) = values_.row(rows[k]);
  }
  return TimeSeries(columns_, std::move(t), std::move(v));
}

bool TimeSeries::operator==(const TimeSeries& other) const {
  return columns_ == other.columns_ && time_.size() == other.time_.size() && time_ == other.time_ &&
         values_.rows() == other.values_.rows() && values_.cols() == other.values_.cols() &&
         values_ == other.values_;
}

double relative_linf(const TimeSeries& a, const TimeSeries& reference, std::span<const std::string> names) {
  if (a.samples() != reference.samples() || (a.time() - reference.time()).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("relative_linf: sample grids differ");
  }
  std::vector<std::string> cols(names.begin(), names.end());
  if (cols.empty()) {
    for (const auto& v : reference.columns())
      if (a.has(v.name)) cols.push_back(v.name);
  }
  double worst = 0.0;
  for (const auto& name : cols) {
    const Eigen::VectorXd ref = reference.column(name);
    const double scale = ref.cwiseAbs().maxCoeff();
    const double diff = (a.column(name) - ref).cwiseAbs().maxCoeff();
    if (scale == 0.0) {
      worst = std::max(worst, diff);
    } else {
      worst = std::max(worst, diff / scale);
    }
  }
  return worst;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::published:
      return "published";
    case Provenance::default_value:
      return "default";
    case Provenance::user:
      return "user";
  }
  return "default";
}

void ParameterSet::define(const std::string& name, double value, std::string unit, Provenance provenance) {
  entries_[name] = Parameter{value, std::move(unit), provenance};
}

void ParameterSet::set(const std::string& name, double value, Provenance provenance) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError(name, "unknown parameter");
  if (!std::isfinite(value)) throw ConfigError(name, "value must be finite");
  it->second.value = value;
  it->second.provenance = provenance;
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError(name, "unknown parameter");
  return it->second;
}

void ParameterSet::merge(const ParameterSet& overrides) {
  for (const auto& [name, p] : overrides.entries_) set(name, p.value, p.provenance);
}

}  // namespace compatient
