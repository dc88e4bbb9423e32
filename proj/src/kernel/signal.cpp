#include "compatient/kernel/signal.hpp"

#include <algorithm>
#include <stdexcept>

namespace compatient {

Signal::Signal(Function f, std::string unit, double from_s, double to_s, std::vector<double> breakpoints_s)
    : fn_(std::move(f)), unit_(std::move(unit)), from_(from_s), to_(to_s), breakpoints_(std::move(breakpoints_s)) {
  std::sort(breakpoints_.begin(), breakpoints_.end());
}

Signal Signal::constant(double value, std::string unit) {
  return Signal([value](double) { return value; }, std::move(unit));
}

Signal Signal::from_series(const TimeSeries& series, std::string_view column, Interpolation mode) {
  if (series.samples() == 0) throw std::invalid_argument("cannot build a signal from an empty series");
  auto t = std::make_shared<const Eigen::VectorXd>(series.time());
  auto y = std::make_shared<const Eigen::VectorXd>(series.column(column));
  const double from = (*t)[0];
  const double to = (*t)[t->size() - 1];
  Function f;
  if (mode == Interpolation::sample_hold) {
    f = [t, y](double ts) {
      const double* begin = t->data();
      const double* end = begin + t->size();
      auto it = std::upper_bound(begin, end, ts);
      const auto i = std::max<std::ptrdiff_t>(0, (it - begin) - 1);
      return (*y)[i];
    };
  } else {
    f = [t, y](double ts) {
      const auto n = t->size();
      if (n == 1 || ts <= (*t)[0]) return (*y)[0];
      if (ts >= (*t)[n - 1]) return (*y)[n - 1];
      const double* begin = t->data();
      auto it = std::upper_bound(begin, begin + n, ts);
      const auto i = (it - begin) - 1;
      const double w = (ts - (*t)[i]) / ((*t)[i + 1] - (*t)[i]);
      return (1.0 - w) * (*y)[i] + w * (*y)[i + 1];
    };
  }
  return Signal(std::move(f), series.variable(column).unit, from, to);
}

Signal Signal::affine(double scale, double offset, std::string unit) const {
  if (scale == 1.0 && offset == 0.0) {
    Signal copy = *this;
    copy.unit_ = std::move(unit);
    return copy;
  }
  auto inner = fn_;
  return Signal([inner, scale, offset](double t) { return scale * inner(t) + offset; }, std::move(unit), from_, to_,
                breakpoints_);
}

}  // namespace compatient
