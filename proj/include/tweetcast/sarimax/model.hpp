#pragma once

// Regression with seasonal ARIMA errors:
//
//   (1 - B)^d (1 - B^s)^D y_t = mu + z_t' beta + u_t,   u_t ~ ARMA from
//   phi(B) Phi(B^s) u_t = theta(B) Theta(B^s) eps_t,     eps_t ~ N(0, sigma^2)
//
// where z_t is the equally differenced exogenous row. The ARMA coefficients
// are searched by Nelder-Mead in an unconstrained space; for each candidate,
// mu, beta and sigma^2 are profiled out exactly (GLS on the Kalman-whitened
// regressors), so the optimum is the exact Gaussian maximum likelihood.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tweetcast/common.hpp"
#include "tweetcast/sarimax/differencing.hpp"
#include "tweetcast/sarimax/kalman.hpp"
#include "tweetcast/sarimax/nelder_mead.hpp"
#include "tweetcast/sarimax/polynomial.hpp"

namespace tweetcast::sarimax {

struct OrderSpec {
  std::size_t p = 0, d = 0, q = 0;
  std::size_t P = 0, D = 0, Q = 0;
  std::size_t s = 1;

  std::size_t arma_params() const { return p + q + P + Q; }
  std::size_t lost_to_differencing() const { return d + D * s; }

  void validate(std::size_t n) const {
    if (s < 1) throw ConfigError("seasonal period must be at least 1");
    if ((P || D || Q) && s < 2) throw ConfigError("seasonal terms need a seasonal period of at least 2");
    if (lost_to_differencing() >= n)
      throw insufficient_data("d + D*s = " + std::to_string(lost_to_differencing()) + " is not below the series length " +
                              std::to_string(n));
  }

  std::string str() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" + std::to_string(P) +
           "," + std::to_string(D) + "," + std::to_string(Q) + "," + std::to_string(s) + ")";
  }

  friend bool operator==(const OrderSpec&, const OrderSpec&) = default;
};

struct SarimaxParams {
  std::vector<double> ar, ma, seasonal_ar, seasonal_ma;
  std::vector<double> beta_exog;
  double intercept = 0.0;
  double sigma2 = 1.0;
};

struct SarimaxFit {
  OrderSpec order;
  SarimaxParams params;
  double loglik = 0.0;
  double aic = 0.0;
  /// One-step innovations divided by their standard deviation.
  std::vector<double> residuals;
  std::size_t n_obs_effective = 0;
  bool converged = false;
  std::size_t evaluations = 0;
  std::vector<std::string> exog_names;
  /// Training data, kept so forecasts can continue from the end of it.
  std::vector<double> endog;
  ColumnTable exog;

  /// p + q + P + Q + |exog| + intercept + sigma2.
  std::size_t n_params() const { return order.arma_params() + exog_names.size() + 2; }
};

inline double aic(double loglik, std::size_t k) { return 2.0 * static_cast<double>(k) - 2.0 * loglik; }

inline double rmse(std::span<const double> errors) {
  if (errors.empty()) return 0.0;
  double ss = 0.0;
  for (double e : errors) ss += e * e;
  return std::sqrt(ss / static_cast<double>(errors.size()));
}

/// Expanded ARMA state-space model for the given coefficients.
inline ArmaStateSpace state_space(const OrderSpec& o, const SarimaxParams& p) {
  const auto ar = multiply(ar_polynomial(p.ar), ar_polynomial(p.seasonal_ar, o.s));
  const auto ma = multiply(ma_polynomial(p.ma), ma_polynomial(p.seasonal_ma, o.s));
  std::vector<double> ar_coef, ma_coef;
  for (std::size_t j = 1; j < ar.size(); ++j) ar_coef.push_back(-ar[j]);
  for (std::size_t j = 1; j < ma.size(); ++j) ma_coef.push_back(ma[j]);
  return ArmaStateSpace(std::move(ar_coef), std::move(ma_coef));
}

namespace detail {

inline void check_exog(std::size_t n, const ColumnTable& exog) {
  if (exog.names.size() != exog.columns.size()) throw DataError("alignment", "exogenous names and columns differ");
  for (std::size_t c = 0; c < exog.columns.size(); ++c) {
    if (exog.columns[c].size() != n)
      throw DataError("alignment", "exogenous column " + exog.names[c] + " has " + std::to_string(exog.columns[c].size()) +
                                       " rows, expected " + std::to_string(n));
    for (double x : exog.columns[c])
      if (!std::isfinite(x)) throw DataError("missing_value", "exogenous column " + exog.names[c] + " has missing values");
  }
}

/// Differenced response and regressor columns (intercept first).
struct Design {
  Differenced y;
  std::vector<std::vector<double>> X;
  std::vector<std::string> names;
};

inline Design make_design(std::span<const double> endog, const ColumnTable& exog, const OrderSpec& o) {
  for (double x : endog)
    if (!std::isfinite(x)) throw DataError("missing_value", "endogenous series has missing values");
  check_exog(endog.size(), exog);
  Design des;
  des.y = difference(endog, o.d, o.D, o.s);
  des.X.emplace_back(des.y.values.size(), 1.0);
  des.names.push_back("intercept");
  for (std::size_t c = 0; c < exog.columns.size(); ++c) {
    des.X.push_back(difference(exog.columns[c], o.d, o.D, o.s).values);
    des.names.push_back(exog.names[c]);
  }
  return des;
}

inline Eigen::MatrixXd as_matrix(const std::vector<std::vector<double>>& cols) {
  const auto n = static_cast<Eigen::Index>(cols.front().size());
  Eigen::MatrixXd M(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (Eigen::Index t = 0; t < n; ++t) M(t, static_cast<Eigen::Index>(c)) = cols[c][static_cast<std::size_t>(t)];
  return M;
}

/// Throws a regression error naming the columns that are linear combinations
/// of the others.
inline void check_rank(const Design& des) {
  const auto X = as_matrix(des.X);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank == des.X.size()) return;
  std::string dropped;
  for (std::size_t i = rank; i < des.X.size(); ++i) {
    const auto col = static_cast<std::size_t>(qr.colsPermutation().indices()(static_cast<Eigen::Index>(i)));
    dropped += (dropped.empty() ? "" : ", ") + des.names[col];
  }
  throw DataError("collinear_exog", "regressors are rank-deficient after differencing; redundant: " + dropped);
}

struct Profile {
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> coef;  // intercept, then exog
  double sigma2 = 0.0;
  std::vector<double> innovations;
  std::vector<double> F;
  bool ok = false;
};

/// Exact log-likelihood with the regression coefficients and sigma^2
/// concentrated out.
inline Profile profile(const ArmaStateSpace& model, const Design& des) {
  Profile pr;
  std::vector<std::span<const double>> cols{des.y.values};
  for (const auto& x : des.X) cols.emplace_back(x);
  auto f = kalman_filter(model, cols);
  if (!f.ok) return pr;
  const std::size_t n = f.F.size();
  const std::size_t k = des.X.size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t t = 0; t < n; ++t) {
    const double w = 1.0 / f.F[t];
    for (std::size_t i = 0; i < k; ++i) {
      const double xi = f.innovations[i + 1][t];
      b(static_cast<Eigen::Index>(i)) += w * xi * f.innovations[0][t];
      for (std::size_t j = 0; j <= i; ++j) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += w * xi * f.innovations[j + 1][t];
    }
  }
  A = A.selfadjointView<Eigen::Lower>();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) return pr;
  const Eigen::VectorXd beta = ldlt.solve(b);
  if (!beta.allFinite()) return pr;
  pr.coef.assign(beta.data(), beta.data() + beta.size());
  pr.innovations.resize(n);
  double ss = 0.0, logdet = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double v = f.innovations[0][t];
    for (std::size_t i = 0; i < k; ++i) v -= pr.coef[i] * f.innovations[i + 1][t];
    pr.innovations[t] = v;
    ss += v * v / f.F[t];
    logdet += std::log(f.F[t]);
  }
  const auto nd = static_cast<double>(n);
  pr.sigma2 = ss / nd;
  if (!(pr.sigma2 > 0.0)) return pr;
  pr.loglik = -0.5 * (nd * std::log(2.0 * M_PI * pr.sigma2) + logdet + nd);
  pr.F = std::move(f.F);
  pr.ok = std::isfinite(pr.loglik);
  return pr;
}

/// Unconstrained vector layout: [ar p | ma q | seasonal ar P | seasonal ma Q].
inline SarimaxParams arma_from_unconstrained(const OrderSpec& o, const std::vector<double>& x) {
  SarimaxParams p;
  auto seg = [&](std::size_t off, std::size_t len) { return std::span<const double>(x).subspan(off, len); };
  p.ar = constrain_stationary(seg(0, o.p));
  p.ma = constrain_stationary(seg(o.p, o.q));
  for (auto& c : p.ma) c = -c;
  p.seasonal_ar = constrain_stationary(seg(o.p + o.q, o.P));
  p.seasonal_ma = constrain_stationary(seg(o.p + o.q + o.P, o.Q));
  for (auto& c : p.seasonal_ma) c = -c;
  return p;
}

/// Maps AR-convention coefficients to unconstrained values, shrinking them
/// towards zero until they are stationary.
inline std::vector<double> unconstrain_or_shrink(std::vector<double> coef) {
  std::vector<double> x;
  for (int attempt = 0; attempt < 200; ++attempt) {
    if (unconstrain_stationary(coef, x)) {
      bool moderate = true;
      for (double v : x) moderate = moderate && std::abs(v) < 10.0;
      if (moderate) return x;
    }
    double scale = 0.9;
    for (auto& c : coef) {
      c *= scale;
      scale *= 0.9;
    }
  }
  return std::vector<double>(coef.size(), 0.0);
}

/// Least squares; returns nullopt when the system is too small or singular.
inline std::optional<Eigen::VectorXd> least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < X.cols() + 5) return std::nullopt;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) return std::nullopt;
  Eigen::VectorXd b = qr.solve(y);
  if (!b.allFinite()) return std::nullopt;
  return b;
}

/// Hannan-Rissanen starting values: long autoregression for innovation
/// estimates, then one regression on lagged values and lagged innovations.
/// Seasonal lags enter as separate regressors (cross terms ignored).
inline std::vector<double> hannan_rissanen(const OrderSpec& o, const Design& des) {
  std::vector<double> start(o.arma_params(), 0.0);
  if (o.arma_params() == 0) return start;
  const std::size_t n = des.y.values.size();
  Eigen::VectorXd u;
  {
    const auto X = as_matrix(des.X);
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(des.y.values.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd b = X.colPivHouseholderQr().solve(y);
    u = y - X * b;
  }
  std::vector<std::size_t> ar_lags, ma_lags;
  for (std::size_t i = 1; i <= o.p; ++i) ar_lags.push_back(i);
  for (std::size_t i = 1; i <= o.P; ++i) ar_lags.push_back(i * o.s);
  for (std::size_t i = 1; i <= o.q; ++i) ma_lags.push_back(i);
  for (std::size_t i = 1; i <= o.Q; ++i) ma_lags.push_back(i * o.s);

  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::size_t h = 0;
  if (!ma_lags.empty()) {
    h = std::min<std::size_t>(std::max<std::size_t>(20, 2 * (o.p + o.P * o.s + o.q + o.Q * o.s)), n / 3);
    if (h == 0) return start;
    Eigen::MatrixXd L(static_cast<Eigen::Index>(n - h), static_cast<Eigen::Index>(h));
    for (std::size_t t = h; t < n; ++t)
      for (std::size_t j = 1; j <= h; ++j) L(static_cast<Eigen::Index>(t - h), static_cast<Eigen::Index>(j - 1)) = u(static_cast<Eigen::Index>(t - j));
    auto a = least_squares(L, u.tail(static_cast<Eigen::Index>(n - h)));
    if (!a) return start;
    e.tail(static_cast<Eigen::Index>(n - h)) = u.tail(static_cast<Eigen::Index>(n - h)) - L * *a;
  }
  std::size_t first = h;
  for (auto l : ar_lags) first = std::max(first, l);
  for (auto l : ma_lags) first = std::max(first, h + l);
  if (first >= n) return start;
  const std::size_t rows = n - first;
  Eigen::MatrixXd R(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ar_lags.size() + ma_lags.size()));
  for (std::size_t t = first; t < n; ++t) {
    Eigen::Index c = 0;
    for (auto l : ar_lags) R(static_cast<Eigen::Index>(t - first), c++) = u(static_cast<Eigen::Index>(t - l));
    for (auto l : ma_lags) R(static_cast<Eigen::Index>(t - first), c++) = e(static_cast<Eigen::Index>(t - l));
  }
  auto coef = least_squares(R, u.tail(static_cast<Eigen::Index>(rows)));
  if (!coef) return start;
  std::vector<double> c(coef->data(), coef->data() + coef->size());
  auto take = [&](std::size_t off, std::size_t len, bool ma) {
    std::vector<double> v(c.begin() + static_cast<std::ptrdiff_t>(off), c.begin() + static_cast<std::ptrdiff_t>(off + len));
    if (ma)
      for (auto& x : v) x = -x;
    return unconstrain_or_shrink(std::move(v));
  };
  std::vector<double> x;
  for (auto part : {take(0, o.p, false), take(o.p + o.P, o.q, true), take(o.p, o.P, false), take(o.p + o.P + o.q, o.Q, true)})
    x.insert(x.end(), part.begin(), part.end());
  return x;
}

inline void fill_regression(SarimaxParams& p, const Profile& pr) {
  p.intercept = pr.coef.front();
  p.beta_exog.assign(pr.coef.begin() + 1, pr.coef.end());
  p.sigma2 = pr.sigma2;
}

}  // namespace detail

struct FitOptions {
  NelderMeadOptions optimizer{};
  /// Nelder-Mead runs: Hannan-Rissanen start, zero start, then seeded
  /// perturbations of the Hannan-Rissanen start.
  std::size_t restarts = 3;
  std::uint64_t seed = 20;
};

/// Exact maximum-likelihood fit.
inline SarimaxFit fit(std::span<const double> endog, const ColumnTable& exog, const OrderSpec& order,
                      const FitOptions& options = {}) {
  order.validate(endog.size());
  const auto des = detail::make_design(endog, exog, order);
  if (des.y.values.size() < des.X.size() + order.arma_params() + 2)
    throw insufficient_data("too few observations for order " + order.str());
  detail::check_rank(des);

  auto objective = [&](const std::vector<double>& x) {
    const auto p = detail::arma_from_unconstrained(order, x);
    const auto pr = detail::profile(state_space(order, p), des);
    return pr.ok ? -pr.loglik : std::numeric_limits<double>::infinity();
  };

  const auto hr = detail::hannan_rissanen(order, des);
  Rng rng(options.seed);
  NelderMeadResult best;
  std::size_t evaluations = 0;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    std::vector<double> x0 = hr;
    if (r == 1) std::fill(x0.begin(), x0.end(), 0.0);
    if (r >= 2)
      for (auto& v : x0) v += rng.normal(0.0, 0.5);
    auto res = nelder_mead(objective, x0, options.optimizer);
    evaluations += res.evaluations;
    if (res.f < best.f) best = std::move(res);
    if (order.arma_params() == 0) break;
  }
  if (!std::isfinite(best.f)) throw NumericError("fit_failure", "likelihood is not finite at any restart for order " + order.str());

  SarimaxFit out;
  out.order = order;
  out.params = detail::arma_from_unconstrained(order, best.x);
  const auto pr = detail::profile(state_space(order, out.params), des);
  detail::fill_regression(out.params, pr);
  out.loglik = pr.loglik;
  out.converged = best.converged;
  out.evaluations = evaluations;
  out.exog_names = exog.names;
  out.n_obs_effective = pr.innovations.size();
  out.residuals.resize(pr.innovations.size());
  for (std::size_t t = 0; t < pr.innovations.size(); ++t)
    out.residuals[t] = pr.innovations[t] / std::sqrt(pr.sigma2 * pr.F[t]);
  out.aic = aic(out.loglik, out.n_params());
  out.endog.assign(endog.begin(), endog.end());
  out.exog = exog;
  return out;
}

namespace detail {

/// Kalman pass over the regression residual series for fixed parameters.
inline FilterOutput filter_residuals(const OrderSpec& order, const SarimaxParams& params, const Design& des) {
  std::vector<double> u(des.y.values);
  for (std::size_t t = 0; t < u.size(); ++t) {
    u[t] -= params.intercept;
    for (std::size_t c = 0; c < params.beta_exog.size(); ++c) u[t] -= params.beta_exog[c] * des.X[c + 1][t];
  }
  auto f = kalman_filter(state_space(order, params), {std::span<const double>(u)});
  if (!f.ok) throw NumericError("filter_failure", "Kalman filter failed for order " + order.str());
  return f;
}

inline void check_param_shapes(const OrderSpec& o, const SarimaxParams& p, std::size_t n_exog) {
  if (p.ar.size() != o.p || p.ma.size() != o.q || p.seasonal_ar.size() != o.P || p.seasonal_ma.size() != o.Q)
    throw DataError("alignment", "parameter vector lengths do not match order " + o.str());
  if (p.beta_exog.size() != n_exog) throw DataError("alignment", "exogenous coefficient count does not match the columns");
}

}  // namespace detail

/// Exact Gaussian log-likelihood at fixed parameters.
inline double loglikelihood(std::span<const double> endog, const ColumnTable& exog, const OrderSpec& order,
                            const SarimaxParams& params) {
  order.validate(endog.size());
  detail::check_param_shapes(order, params, exog.columns.size());
  if (!(params.sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
  const auto des = detail::make_design(endog, exog, order);
  const auto f = detail::filter_residuals(order, params, des);
  double ll = 0.0;
  for (std::size_t t = 0; t < f.F.size(); ++t) {
    const double var = params.sigma2 * f.F[t];
    const double v = f.innovations[0][t];
    ll -= 0.5 * (std::log(2.0 * M_PI * var) + v * v / var);
  }
  return ll;
}

/// One-step-ahead predictions aligned with `endog`; the first d + D*s entries
/// are NaN. The prediction at t uses observations before t only.
inline std::vector<double> predict_one_step(const SarimaxFit& fit, std::span<const double> endog, const ColumnTable& exog) {
  if (exog.columns.size() != fit.exog_names.size())
    throw DataError("alignment", "expected " + std::to_string(fit.exog_names.size()) + " exogenous columns, got " +
                                     std::to_string(exog.columns.size()));
  fit.order.validate(endog.size());
  const auto des = detail::make_design(endog, exog, fit.order);
  const auto f = detail::filter_residuals(fit.order, fit.params, des);
  const std::size_t lost = fit.order.lost_to_differencing();
  std::vector<double> pred(endog.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < f.F.size(); ++t) pred[t + lost] = endog[t + lost] - f.innovations[0][t];
  return pred;
}

struct ForecastResult {
  std::size_t horizon = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<std::pair<double, double>> interval_95;
};

/// Multi-step forecast from the end of the training data. `future_exog` must
/// hold exactly `horizon` rows for every exogenous column.
inline ForecastResult forecast(const SarimaxFit& fit, std::size_t horizon, const ColumnTable& future_exog) {
  ForecastResult out;
  out.horizon = horizon;
  const std::size_t k_exog = fit.exog_names.size();
  if (future_exog.columns.size() != k_exog)
    throw DataError("missing_future_exog", "forecast needs " + std::to_string(k_exog) + " future exogenous columns, got " +
                                               std::to_string(future_exog.columns.size()));
  for (std::size_t c = 0; c < k_exog; ++c)
    if (future_exog.columns[c].size() != horizon)
      throw DataError("missing_future_exog", "future exogenous column " + fit.exog_names[c] + " has " +
                                                 std::to_string(future_exog.columns[c].size()) + " rows; horizon is " +
                                                 std::to_string(horizon));
  if (horizon == 0) return out;

  const auto& o = fit.order;
  const auto des = detail::make_design(fit.endog, fit.exog, o);
  const auto f = detail::filter_residuals(o, fit.params, des);
  const auto model = state_space(o, fit.params);
  const std::size_t L = model.dim();

  // Differenced future regressors.
  std::vector<std::vector<double>> z(k_exog);
  for (std::size_t c = 0; c < k_exog; ++c) {
    std::vector<double> full(fit.exog.columns[c]);
    full.insert(full.end(), future_exog.columns[c].begin(), future_exog.columns[c].end());
    for (double x : future_exog.columns[c])
      if (!std::isfinite(x)) throw DataError("missing_value", "future exogenous values must be finite");
    auto dz = difference(full, o.d, o.D, o.s).values;
    z[c].assign(dz.end() - static_cast<std::ptrdiff_t>(horizon), dz.end());
  }

  // Differenced-scale means and error covariances.
  std::vector<double> a(f.next_state.front());
  std::vector<double> P(f.next_cov);
  std::vector<double> w_mean(horizon);
  std::vector<std::vector<double>> cov_w(horizon, std::vector<double>(horizon, 0.0));
  for (std::size_t h = 0; h < horizon; ++h) {
    double m = fit.params.intercept + a[0];
    for (std::size_t c = 0; c < k_exog; ++c) m += fit.params.beta_exog[c] * z[c][h];
    w_mean[h] = m;
    std::vector<double> u(L);
    for (std::size_t i = 0; i < L; ++i) u[i] = P[i * L];
    for (std::size_t j = h; j < horizon; ++j) {
      cov_w[j][h] = cov_w[h][j] = fit.params.sigma2 * u[0];
      model.apply_t(u);
    }
    model.apply_t(a);
    model.propagate_covariance(P);
  }

  // Undo differencing: y_{n+h} = w_{n+h} - sum_{j>=1} delta_j y_{n+h-j}.
  const auto delta = difference_polynomial(o.d, o.D, o.s);
  std::vector<double> y(fit.endog);
  const std::size_t n = y.size();
  // C maps differenced-scale errors to level errors (lower triangular).
  std::vector<std::vector<double>> C(horizon, std::vector<double>(horizon, 0.0));
  for (std::size_t h = 0; h < horizon; ++h) {
    double level = w_mean[h];
    C[h][h] = 1.0;
    for (std::size_t j = 1; j < delta.size(); ++j) {
      level -= delta[j] * y[n + h - j];
      if (j <= h)
        for (std::size_t i = 0; i <= h - j; ++i) C[h][i] -= delta[j] * C[h - j][i];
    }
    y.push_back(level);
  }
  out.mean.assign(y.begin() + static_cast<std::ptrdiff_t>(n), y.end());
  out.variance.resize(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    double v = 0.0;
    for (std::size_t i = 0; i <= h; ++i)
      for (std::size_t j = 0; j <= h; ++j) v += C[h][i] * cov_w[i][j] * C[h][j];
    out.variance[h] = v;
    const double half = 1.96 * std::sqrt(v);
    out.interval_95.emplace_back(out.mean[h] - half, out.mean[h] + half);
  }
  return out;
}

struct GridRanges {
  std::size_t p_max = 2, q_max = 2, P_max = 2, Q_max = 2;
  std::size_t d = 0, D = 0, s = 1;
};

struct GridEntry {
  OrderSpec order;
  bool ok = false;
  bool converged = false;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  double aic = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct GridResult {
  SarimaxFit best;
  std::vector<GridEntry> table;
};

/// Fits every (p, q, P, Q) in the ranges and keeps the minimum-AIC converged
/// fit; ties go to the lexicographically smallest (p, q, P, Q). When no
/// candidate converges, the minimum-AIC successful fit is used.
inline GridResult grid_search(std::span<const double> endog, const ColumnTable& exog, const GridRanges& ranges,
                              const FitOptions& options = {}) {
  if (ranges.s < 2 && (ranges.P_max || ranges.Q_max || ranges.D))
    throw ConfigError("seasonal ranges need a seasonal period of at least 2");
  GridResult out;
  std::optional<SarimaxFit> best_conv, best_any;
  for (std::size_t p = 0; p <= ranges.p_max; ++p)
    for (std::size_t q = 0; q <= ranges.q_max; ++q)
      for (std::size_t P = 0; P <= ranges.P_max; ++P)
        for (std::size_t Q = 0; Q <= ranges.Q_max; ++Q) {
          GridEntry e;
          e.order = {p, ranges.d, q, P, ranges.D, Q, ranges.s};
          try {
            auto f = fit(endog, exog, e.order, options);
            e.ok = true;
            e.converged = f.converged;
            e.loglik = f.loglik;
            e.aic = f.aic;
            if (f.converged && (!best_conv || f.aic < best_conv->aic)) best_conv = f;
            if (!best_any || f.aic < best_any->aic) best_any = std::move(f);
          } catch (const Error& err) {
            e.error = err.what();
          }
          out.table.push_back(std::move(e));
        }
  if (!best_any) {
    std::string reasons;
    for (const auto& e : out.table) reasons += "\n  " + e.order.str() + ": " + e.error;
    throw NumericError("grid_failure", "every candidate order failed:" + reasons);
  }
  out.best = best_conv ? std::move(*best_conv) : std::move(*best_any);
  return out;
}

struct EvalReport {
  double split_ratio = 0.7;
  std::size_t split_index = 0;
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  SarimaxFit fit;
  /// One-step predictions over the whole series (NaN where undefined).
  std::vector<double> predictions;
};

/// Fits on the first floor(ratio * n) points, then filters the whole series
/// with the fitted parameters; test predictions use the true past values but
/// never re-fit.
inline EvalReport evaluate(std::span<const double> endog, const ColumnTable& exog, const OrderSpec& order,
                           double split_ratio = 0.7, const FitOptions& options = {}) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split ratio must lie in (0, 1)");
  const std::size_t n = endog.size();
  detail::check_exog(n, exog);
  EvalReport r;
  r.split_ratio = split_ratio;
  r.split_index = static_cast<std::size_t>(std::floor(split_ratio * static_cast<double>(n)));
  if (r.split_index >= n) throw insufficient_data("test segment is empty");
  ColumnTable train_exog;
  for (std::size_t c = 0; c < exog.columns.size(); ++c)
    train_exog.add(exog.names[c], std::vector<double>(exog.columns[c].begin(),
                                                      exog.columns[c].begin() + static_cast<std::ptrdiff_t>(r.split_index)));
  r.fit = fit(endog.subspan(0, r.split_index), train_exog, order, options);
  r.predictions = predict_one_step(r.fit, endog, exog);
  std::vector<double> train_err, test_err;
  for (std::size_t t = 0; t < n; ++t) {
    if (std::isnan(r.predictions[t])) continue;
    (t < r.split_index ? train_err : test_err).push_back(endog[t] - r.predictions[t]);
  }
  r.rmse_train = rmse(train_err);
  r.rmse_test = rmse(test_err);
  return r;
}

inline nlohmann::json to_json(const OrderSpec& o) {
  return {{"p", o.p}, {"d", o.d}, {"q", o.q}, {"P", o.P}, {"D", o.D}, {"Q", o.Q}, {"s", o.s}};
}

inline nlohmann::json to_json(const SarimaxFit& f) {
  return {{"order", to_json(f.order)},
          {"params",
           {{"ar", f.params.ar},
            {"ma", f.params.ma},
            {"seasonal_ar", f.params.seasonal_ar},
            {"seasonal_ma", f.params.seasonal_ma},
            {"exog_names", f.exog_names},
            {"beta_exog", f.params.beta_exog},
            {"intercept", f.params.intercept},
            {"sigma2", f.params.sigma2}}},
          {"loglik", f.loglik},
          {"aic", f.aic},
          {"n_params", f.n_params()},
          {"n_obs_effective", f.n_obs_effective},
          {"converged", f.converged},
          {"evaluations", f.evaluations}};
}

}  // namespace tweetcast::sarimax
