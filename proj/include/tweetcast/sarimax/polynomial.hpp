#pragma once

// Lag polynomials and the stationarity-preserving reparameterisation.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tweetcast::sarimax {

/// Coefficients of a lag polynomial, index = power of B.
using LagPolynomial = std::vector<double>;

inline LagPolynomial multiply(const LagPolynomial& a, const LagPolynomial& b) {
  if (a.empty() || b.empty()) return {};
  LagPolynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// 1 - c_1 B^s - c_2 B^{2s} - ... (the AR sign convention).
inline LagPolynomial ar_polynomial(std::span<const double> coeffs, std::size_t s = 1) {
  LagPolynomial p(coeffs.size() * s + 1, 0.0);
  p[0] = 1.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) p[(i + 1) * s] = -coeffs[i];
  return p;
}

/// 1 + c_1 B^s + c_2 B^{2s} + ... (the MA sign convention).
inline LagPolynomial ma_polynomial(std::span<const double> coeffs, std::size_t s = 1) {
  LagPolynomial p(coeffs.size() * s + 1, 0.0);
  p[0] = 1.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) p[(i + 1) * s] = coeffs[i];
  return p;
}

/// (1 - B)^d (1 - B^s)^D.
inline LagPolynomial difference_polynomial(std::size_t d, std::size_t D, std::size_t s) {
  LagPolynomial p{1.0};
  for (std::size_t i = 0; i < d; ++i) p = multiply(p, {1.0, -1.0});
  for (std::size_t i = 0; i < D; ++i) {
    LagPolynomial seasonal(s + 1, 0.0);
    seasonal[0] = 1.0;
    seasonal[s] = -1.0;
    p = multiply(p, seasonal);
  }
  return p;
}

/// Roots of a lag polynomial (companion-matrix eigenvalues). Trailing zero
/// coefficients are dropped first.
inline std::vector<std::complex<double>> roots(LagPolynomial p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
  const std::size_t deg = p.size() - 1;
  if (deg == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
  for (std::size_t i = 0; i < deg; ++i) companion(0, static_cast<Eigen::Index>(i)) = -p[deg - 1 - i] / p[deg];
  for (std::size_t i = 1; i < deg; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

/// True when every root lies strictly outside the unit circle.
inline bool roots_outside_unit_circle(const LagPolynomial& p, double margin = 0.0) {
  for (const auto& r : roots(p))
    if (std::abs(r) <= 1.0 + margin) return false;
  return true;
}

/// Maps unconstrained reals to the coefficients of a stationary AR polynomial
/// 1 - sum c_j B^j: each x becomes a partial autocorrelation x / sqrt(1 + x^2)
/// and Durbin-Levinson builds the coefficients.
inline std::vector<double> constrain_stationary(std::span<const double> x) {
  const std::size_t p = x.size();
  std::vector<double> coef(p, 0.0), prev(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const double r = x[k] / std::sqrt(1.0 + x[k] * x[k]);
    prev = coef;
    coef[k] = r;
    for (std::size_t j = 0; j < k; ++j) coef[j] = prev[j] - r * prev[k - 1 - j];
  }
  return coef;
}

/// Inverse of constrain_stationary. Returns false when the coefficients are
/// not stationary.
inline bool unconstrain_stationary(std::span<const double> coef_in, std::vector<double>& x) {
  const std::size_t p = coef_in.size();
  std::vector<double> coef(coef_in.begin(), coef_in.end());
  x.assign(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    const double r = coef[k];
    if (!(std::abs(r) < 1.0)) return false;
    x[k] = r / std::sqrt(1.0 - r * r);
    std::vector<double> prev(k);
    for (std::size_t j = 0; j < k; ++j) prev[j] = (coef[j] + r * coef[k - 1 - j]) / (1.0 - r * r);
    for (std::size_t j = 0; j < k; ++j) coef[j] = prev[j];
  }
  return true;
}

}  // namespace tweetcast::sarimax
