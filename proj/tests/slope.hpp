#pragma once

#include <cmath>
#include <vector>

namespace reflkit::testing {

// Least-squares slope of log(err) against log(k).
inline double loglog_slope(const std::vector<double>& ks, const std::vector<double>& errs) {
  const std::size_t n = ks.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(ks[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a * std::pow(b / a, double(i) / (n - 1));
  return out;
}

}  // namespace reflkit::testing
