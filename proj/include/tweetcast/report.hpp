#pragma once

// Summary statistics behind the plot-data tables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "tweetcast/common.hpp"
#include "tweetcast/sarimax/diagnostics.hpp"

namespace tweetcast {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw insufficient_data("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Five-number summary with 1.5 x IQR fences. `min` and `max` are the
/// whisker ends: the most extreme values inside the fences, clamped so they
/// never fall inside the box (small samples can put every value below q1
/// outside the fence).
struct BoxplotSummary {
  std::size_t n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::vector<double> outliers;
};

inline BoxplotSummary boxplot(std::span<const double> xs) {
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  BoxplotSummary b;
  b.n = s.size();
  b.q1 = quantile_sorted(s, 0.25);
  b.median = quantile_sorted(s, 0.5);
  b.q3 = quantile_sorted(s, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.min = std::numeric_limits<double>::infinity();
  b.max = -std::numeric_limits<double>::infinity();
  for (double x : s) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
    } else {
      b.min = std::min(b.min, x);
      b.max = std::max(b.max, x);
    }
  }
  b.min = std::min(b.min, b.q1);
  b.max = std::max(b.max, b.q3);
  return b;
}

/// Adjusted Fisher-Pearson skewness G1 = sqrt(n(n-1)) / (n-2) * m3 / m2^1.5.
inline double skewness(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 3) throw insufficient_data("skewness needs at least 3 values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  if (!(m2 > 0.0)) return 0.0;
  const auto nd = static_cast<double>(n);
  return std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * m3 / std::pow(m2, 1.5);
}

/// Histogram whose bin masses (density x width) sum to one.
inline sarimax::Histogram normalized_histogram(std::span<const double> xs, std::size_t bins) {
  return sarimax::histogram(xs, bins);
}

}  // namespace tweetcast
