#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace compatient {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A named, unit-annotated quantity (state variable, observable or port).
struct Variable {
  std::string name;
  std::string unit;

  bool operator==(const Variable&) const = default;
};

/// Ordered set of uniquely named variables. The order is the layout of the
/// corresponding Eigen state vector and never changes after construction.
class StateLayout {
 public:
  StateLayout() = default;
  explicit StateLayout(std::vector<Variable> variables);

  Eigen::Index size() const { return static_cast<Eigen::Index>(variables_.size()); }
  const Variable& operator[](Eigen::Index i) const { return variables_[static_cast<std::size_t>(i)]; }
  const std::vector<Variable>& variables() const { return variables_; }

  /// Index of `name`, or -1.
  Eigen::Index find(std::string_view name) const;
  /// Index of `name`; throws std::out_of_range when absent.
  Eigen::Index index_of(std::string_view name) const;

  bool operator==(const StateLayout&) const = default;

 private:
  std::vector<Variable> variables_;
};

/// Sampled trajectory: one row per sample, one column per variable.
/// Time is always stored in seconds, whatever unit the producing module uses.
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(std::vector<Variable> columns, Eigen::VectorXd time_s, Eigen::MatrixXd values);

  Eigen::Index samples() const { return time_.size(); }
  const std::vector<Variable>& columns() const { return columns_; }
  const Eigen::VectorXd& time() const { return time_; }
  const Eigen::MatrixXd& values() const { return values_; }

  bool has(std::string_view name) const;
  Eigen::Index column_index(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;
  const Variable& variable(std::string_view name) const;

  /// Rows whose time lies in [from_s, to_s].
  TimeSeries slice(double from_s, double to_s) const;

  bool operator==(const TimeSeries& other) const;

 private:
  std::vector<Variable> columns_;
  Eigen::VectorXd time_;
  Eigen::MatrixXd values_;
};

/// Largest per-column relative deviation max|a - b| / max|b| over the named
/// columns (all shared columns when `names` is empty). Both series must share
/// the same sample times.
double relative_linf(const TimeSeries& a, const TimeSeries& reference, std::span<const std::string> names = {});

enum class Provenance { published, default_value, user };

std::string_view to_string(Provenance p);

struct Parameter {
  double value = 0.0;
  std::string unit;
  Provenance provenance = Provenance::default_value;
};

/// Flat name -> parameter map. Names are dotted, prefixed with the owning
/// module ("ras.k_NEP"), so every rhs parameter lives in exactly one set.
class ParameterSet {
 public:
  void define(const std::string& name, double value, std::string unit, Provenance provenance);
  /// Overrides an existing entry; throws ConfigError for unknown names.
  void set(const std::string& name, double value, Provenance provenance = Provenance::user);

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const Parameter& at(const std::string& name) const;
  double value(const std::string& name) const { return at(name).value; }

  /// Applies every entry of `overrides` (all must already exist here).
  void merge(const ParameterSet& overrides);

  const std::map<std::string, Parameter>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Parameter> entries_;
};

/// Binds a parameter name to a double member of a parameter struct, so each
/// module declares its parameter table once.
template <typename Params>
struct ParamField {
  const char* name;
  const char* unit;
  double Params::*member;
};

template <typename Params, std::size_t N>
void export_parameters(const Params& params, const std::array<ParamField<Params>, N>& fields,
                       const std::string& prefix, ParameterSet& out,
                       Provenance provenance = Provenance::default_value) {
  for (const auto& f : fields) out.define(prefix + f.name, params.*(f.member), f.unit, provenance);
}

template <typename Params, std::size_t N>
void import_parameters(const ParameterSet& in, const std::array<ParamField<Params>, N>& fields,
                       const std::string& prefix, Params& params) {
  for (const auto& f : fields) {
    const std::string key = prefix + f.name;
    if (in.contains(key)) params.*(f.member) = in.value(key);
  }
}

}  // namespace compatient
