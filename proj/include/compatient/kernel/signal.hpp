#pragma once

#include "compatient/kernel/state.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace compatient {

enum class Interpolation { linear, sample_hold };

/// A scalar input signal of time (seconds), with a unit, a domain of
/// definition and the instants where it is discontinuous or kinked.
/// Integrators restart at breakpoints so piecewise inputs are resolved exactly.
class Signal {
 public:
  using Function = std::function<double(double)>;

  Signal() = default;
  Signal(Function f, std::string unit, double from_s = -std::numeric_limits<double>::infinity(),
         double to_s = std::numeric_limits<double>::infinity(), std::vector<double> breakpoints_s = {});

  static Signal constant(double value, std::string unit);
  static Signal from_series(const TimeSeries& series, std::string_view column, Interpolation mode);

  double operator()(double t_s) const { return fn_(t_s); }
  explicit operator bool() const { return static_cast<bool>(fn_); }

  /// scale * signal + offset, with a new unit.
  Signal affine(double scale, double offset, std::string unit) const;

  const std::string& unit() const { return unit_; }
  double from() const { return from_; }
  double to() const { return to_; }
  bool covers(double t0_s, double t1_s) const { return from_ <= t0_s && t1_s <= to_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  Function fn_;
  std::string unit_;
  double from_ = -std::numeric_limits<double>::infinity();
  double to_ = std::numeric_limits<double>::infinity();
  std::vector<double> breakpoints_;
};

}  // namespace compatient
