#include "bhk/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bhk/grid.hpp"

namespace bhk {

FitResult fit_exponent(const std::vector<double>& t, const std::vector<double>& value, double lo, double hi) {
  if (t.size() != value.size()) throw DomainError("fit_exponent: series lengths differ");
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("fit_exponent: window must satisfy 0 < lo <= hi");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo * (1 - 1e-12) || t[i] > hi * (1 + 1e-12)) continue;
    if (!(value[i] > 0.0)) throw DomainError("fit_exponent: nonpositive value " + std::to_string(value[i]) + " at t = " +
                                             std::to_string(t[i]));
    x.push_back(std::log(t[i]));
    y.push_back(std::log(value[i]));
  }
  if (x.size() < 5) throw DomainError("fit_exponent: " + std::to_string(x.size()) + " points in window, need >= 5");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("fit_exponent: window holds a single abscissa");
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    rss += e * e;
  }
  r.stderr_slope = std::sqrt(rss / (m - 2.0) / sxx);
  r.window_lo = std::exp(*std::min_element(x.begin(), x.end()));
  r.window_hi = std::exp(*std::max_element(x.begin(), x.end()));
  r.count = static_cast<int>(x.size());
  return r;
}

FitResult fit_exponent(const std::vector<std::pair<double, double>>& series, double lo, double hi) {
  std::vector<double> t, v;
  for (const auto& [a, b] : series) {
    t.push_back(a);
    v.push_back(b);
  }
  return fit_exponent(t, v, lo, hi);
}

}  // namespace bhk
