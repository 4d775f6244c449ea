#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace tweetcast::sarimax {

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  /// Stop when the spread of objective values across the simplex is below this.
  double f_tolerance = 1e-8;
  /// ... and every vertex is within this distance (max-norm) of the best one.
  double x_tolerance = 1e-6;
  double initial_step = 0.25;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Minimises `f` with the standard reflection/expansion/contraction/shrink
/// simplex (coefficients 1, 2, 1/2, 1/2). Non-finite values are treated as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  if (n == 0) {
    res.x = x0;
    res.f = eval(x0);
    res.converged = std::isfinite(res.f);
    return res;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);
  std::vector<std::size_t> order(n + 1);

  auto point = [&](const std::vector<double>& centroid, const std::vector<double>& worst, double coef) {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + coef * (worst[j] - centroid[j]);
    return p;
  };

  while (res.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto i : order) {
        s2.push_back(simplex[i]);
        f2.push_back(fv[i]);
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    }
    if (std::isfinite(fv[n]) && fv[n] - fv[0] <= opt.f_tolerance) {
      double spread = 0.0;
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 0; j < n; ++j) spread = std::max(spread, std::abs(simplex[i][j] - simplex[0][j]));
      if (spread <= opt.x_tolerance) {
        res.converged = true;
        break;
      }
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

    const auto xr = point(centroid, simplex[n], -1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const auto xe = point(centroid, simplex[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    const auto xc = outside ? point(centroid, simplex[n], -0.5) : point(centroid, simplex[n], 0.5);
    const double fc = eval(xc);
    if (fc < std::min(fr, fv[n])) {
      simplex[n] = xc;
      fv[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
      fv[i] = eval(simplex[i]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  res.x = simplex[best];
  res.f = fv[best];
  return res;
}

}  // namespace tweetcast::sarimax
