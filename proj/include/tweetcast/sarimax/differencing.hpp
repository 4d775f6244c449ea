#pragma once

#include <span>
#include <vector>

#include "tweetcast/common.hpp"

namespace tweetcast::sarimax {

/// Result of applying (1 - B)^d (1 - B^s)^D as a sequence of single lag
/// differences. `anchors[i]` holds the first `lags[i]` values of the series
/// entering step i, which is exactly what integration needs to undo it.
struct Differenced {
  std::vector<double> values;
  std::vector<std::size_t> lags;
  std::vector<std::vector<double>> anchors;
};

inline Differenced difference(std::span<const double> series, std::size_t d, std::size_t D, std::size_t s) {
  if ((D > 0) && s < 2) throw ConfigError("seasonal differencing needs a seasonal period of at least 2");
  const std::size_t lost = d + D * s;
  if (series.size() <= lost)
    throw insufficient_data("differencing with d=" + std::to_string(d) + ", D=" + std::to_string(D) +
                            ", s=" + std::to_string(s) + " needs more than " + std::to_string(lost) + " points");
  Differenced out;
  out.values.assign(series.begin(), series.end());
  auto step = [&](std::size_t lag) {
    out.lags.push_back(lag);
    out.anchors.emplace_back(out.values.begin(), out.values.begin() + static_cast<std::ptrdiff_t>(lag));
    std::vector<double> next(out.values.size() - lag);
    for (std::size_t t = lag; t < out.values.size(); ++t) next[t - lag] = out.values[t] - out.values[t - lag];
    out.values = std::move(next);
  };
  for (std::size_t i = 0; i < d; ++i) step(1);
  for (std::size_t i = 0; i < D; ++i) step(s);
  return out;
}

/// Inverse of difference(): rebuilds the original series from the differenced
/// values and the stored anchors.
inline std::vector<double> integrate(std::span<const double> values, const Differenced& how) {
  std::vector<double> cur(values.begin(), values.end());
  for (std::size_t k = how.lags.size(); k-- > 0;) {
    const std::size_t lag = how.lags[k];
    std::vector<double> prev(how.anchors[k]);
    prev.reserve(cur.size() + lag);
    for (std::size_t t = 0; t < cur.size(); ++t) prev.push_back(cur[t] + prev[t]);
    cur = std::move(prev);
  }
  return cur;
}

}  // namespace tweetcast::sarimax
