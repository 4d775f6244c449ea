#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "tweetcast/common.hpp"

namespace tweetcast {

/// Additive decomposition. trend and residual are NaN on the period/2 edge
/// positions at either end; seasonal is defined everywhere.
struct DecompositionResult {
  std::size_t period = 0;
  std::vector<double> observed, trend, seasonal, residual;
};

/// Classical additive decomposition: centred moving-average trend (2 x period
/// for even periods), per-phase mean of the detrended series re-centred to
/// zero, residual by subtraction.
inline DecompositionResult decompose_additive(std::span<const double> series, std::size_t period) {
  if (period < 2) throw ConfigError("decomposition period must be at least 2");
  const std::size_t n = series.size();
  if (n < 2 * period)
    throw insufficient_data("decomposition needs at least two full periods (" + std::to_string(2 * period) +
                            " points), got " + std::to_string(n));
  for (double x : series)
    if (!std::isfinite(x)) throw DataError("missing_value", "series contains missing or non-finite values");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  DecompositionResult r;
  r.period = period;
  r.observed.assign(series.begin(), series.end());
  r.trend.assign(n, nan);
  r.residual.assign(n, nan);
  r.seasonal.assign(n, 0.0);

  const std::size_t h = period / 2;
  const bool even = period % 2 == 0;
  for (std::size_t t = h; t + h < n; ++t) {
    double s = 0.0;
    if (even) {
      s = 0.5 * (series[t - h] + series[t + h]);
      for (std::size_t j = t - h + 1; j < t + h; ++j) s += series[j];
    } else {
      for (std::size_t j = t - h; j <= t + h; ++j) s += series[j];
    }
    r.trend[t] = s / static_cast<double>(period);
  }

  std::vector<double> phase_sum(period, 0.0);
  std::vector<std::size_t> phase_n(period, 0);
  for (std::size_t t = h; t + h < n; ++t) {
    phase_sum[t % period] += series[t] - r.trend[t];
    ++phase_n[t % period];
  }
  std::vector<double> phase_mean(period);
  double grand = 0.0;
  for (std::size_t p = 0; p < period; ++p) grand += (phase_mean[p] = phase_sum[p] / static_cast<double>(phase_n[p]));
  grand /= static_cast<double>(period);
  for (auto& m : phase_mean) m -= grand;

  for (std::size_t t = 0; t < n; ++t) {
    r.seasonal[t] = phase_mean[t % period];
    if (!std::isnan(r.trend[t])) r.residual[t] = series[t] - r.trend[t] - r.seasonal[t];
  }
  return r;
}

inline void write_decomposition_csv(std::ostream& out, const DecompositionResult& r) {
  auto cell = [](double x) { return std::isnan(x) ? std::string() : format_double(x); };
  out << "index,observed,trend,seasonal,residual\n";
  for (std::size_t t = 0; t < r.observed.size(); ++t)
    out << t << ',' << format_double(r.observed[t]) << ',' << cell(r.trend[t]) << ',' << format_double(r.seasonal[t])
        << ',' << cell(r.residual[t]) << '\n';
}

}  // namespace tweetcast
