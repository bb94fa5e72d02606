#pragma once

#include <utility>
#include <vector>

namespace bhk {

struct FitResult {
  double slope = 0.0, intercept = 0.0;
  double stderr_slope = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  int count = 0;
};

// least squares of log(value) on log(t) over t in [lo, hi]
FitResult fit_exponent(const std::vector<double>& t, const std::vector<double>& value, double lo, double hi);
FitResult fit_exponent(const std::vector<std::pair<double, double>>& series, double lo, double hi);

}  // namespace bhk
