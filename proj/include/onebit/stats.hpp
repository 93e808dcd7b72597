#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace onebit {

// Two-sided 95% Student-t quantile. Table through df=30, then 1/df
// interpolation toward the normal limit; plenty for confidence intervals.
inline double t_quantile_975(int df) {
  static constexpr double kTable[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df < 1) return kTable[0];
  if (df <= 30) return kTable[df - 1];
  const double z = 1.959964;
  // matches the printed tables to ~1e-3 at df = 40, 60, 120
  return z + (z * z * z + z) / (4.0 * df) +
         (5 * z * z * z * z * z + 16 * z * z * z + 3 * z) / (96.0 * df * df);
}

struct SampleSummary {
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n-1 denominator)
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline SampleSummary summarize(const std::vector<double> &values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
  }
  return s;
}

inline double ci95_halfwidth(const SampleSummary &s) {
  if (s.count < 2) return 0.0;
  return t_quantile_975(static_cast<int>(s.count) - 1) *
         std::sqrt(s.variance / static_cast<double>(s.count));
}

}  // namespace onebit
