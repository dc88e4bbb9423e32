#pragma once

#include "compatient/kernel/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace compatient::testing {

// Worst ratio, over state columns, of max|a - b| to the trajectory's band
// atol + rtol * max|b|. Below 1 means halving the tolerances stayed inside
// the band of the looser run.
inline double convergence_ratio(const TimeSeries& a, const TimeSeries& b, const IntegratorConfig& cfg,
                                Eigen::Index state_columns) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < state_columns; ++c) {
    const double diff = (a.values().col(c) - b.values().col(c)).cwiseAbs().maxCoeff();
    const double band = cfg.atol + cfg.rtol * b.values().col(c).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff / band);
  }
  return worst;
}

}  // namespace compatient::testing
