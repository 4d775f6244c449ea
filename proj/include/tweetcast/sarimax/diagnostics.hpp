#pragma once

// Residual diagnostics: standardised series, histogram with normal overlay,
// normal Q-Q pairs, ACF with white-noise bands and the Ljung-Box test.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "tweetcast/common.hpp"
#include "tweetcast/sarimax/model.hpp"

namespace tweetcast::sarimax {

struct Histogram {
  std::vector<double> edges;    // bins + 1
  std::vector<double> density;  // integrates to 1
};

struct DiagnosticReport {
  std::vector<double> standardized;
  Histogram histogram;
  double normal_mean = 0.0;
  double normal_sd = 1.0;
  /// (theoretical normal quantile, ordered standardised residual).
  std::vector<std::pair<double, double>> qq;
  std::vector<double> acf;  // lags 0..max_lag
  double acf_band = 0.0;    // 1.96 / sqrt(n)
  std::size_t ljung_box_lag = 10;
  double ljung_box_stat = 0.0;
  double ljung_box_pvalue = 1.0;
};

/// Sample autocorrelations at lags 0..max_lag (biased, denominator n).
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  std::vector<double> acf;
  for (std::size_t k = 0; k <= std::min(max_lag, n - 1); ++k) {
    double c = 0.0;
    for (std::size_t t = k; t < n; ++t) c += (x[t] - mean) * (x[t - k] - mean);
    acf.push_back(c / c0);
  }
  return acf;
}

/// Ljung-Box Q at `lags` and its chi-square(lags) upper-tail p-value.
inline std::pair<double, double> ljung_box(std::span<const double> x, std::size_t lags) {
  const auto acf = autocorrelation(x, lags);
  const auto n = static_cast<double>(x.size());
  double q = 0.0;
  for (std::size_t k = 1; k < acf.size(); ++k) q += acf[k] * acf[k] / (n - static_cast<double>(k));
  q *= n * (n + 2.0);
  const boost::math::chi_squared dist(static_cast<double>(acf.size() - 1));
  return {q, boost::math::cdf(boost::math::complement(dist, q))};
}

/// Normalised histogram over [min, max] with equal-width bins.
inline Histogram histogram(std::span<const double> x, std::size_t bins) {
  Histogram h;
  if (x.empty() || bins == 0) return h;
  auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + width * static_cast<double>(i));
  std::vector<double> counts(bins, 0.0);
  for (double v : x) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)] += 1.0;
  }
  for (double c : counts) h.density.push_back(c / (static_cast<double>(x.size()) * width));
  return h;
}

inline DiagnosticReport diagnose(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 20) throw insufficient_data("diagnostics need at least 20 residuals, got " + std::to_string(n));
  double mean = 0.0;
  for (double r : residuals) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : residuals) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (!(sd > 0.0)) throw DataError("zero_variance", "residuals have zero variance; cannot standardise");

  DiagnosticReport rep;
  for (double r : residuals) rep.standardized.push_back((r - mean) / sd);
  rep.histogram = histogram(rep.standardized, 20);
  std::vector<double> sorted(rep.standardized);
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal standard;
  for (std::size_t i = 0; i < n; ++i) {
    // Blom plotting position (i - 3/8) / (n + 1/4), i from 1.
    const double pp = (static_cast<double>(i + 1) - 0.375) / (static_cast<double>(n) + 0.25);
    rep.qq.emplace_back(boost::math::quantile(standard, pp), sorted[i]);
  }
  rep.acf = autocorrelation(rep.standardized, 40);
  rep.acf_band = 1.96 / std::sqrt(static_cast<double>(n));
  std::tie(rep.ljung_box_stat, rep.ljung_box_pvalue) = ljung_box(rep.standardized, rep.ljung_box_lag);
  return rep;
}

inline DiagnosticReport diagnostics(const SarimaxFit& fit) { return diagnose(fit.residuals); }

}  // namespace tweetcast::sarimax
