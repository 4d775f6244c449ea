#pragma once

// ARMA(r, m) in Harvey's state-space form, exact Gaussian filtering with the
// stationary initial covariance.
//
//   w_t     = Z alpha_t,                Z = e_0
//   alpha_t+1 = T alpha_t + R eps_t+1,  T = [ar | shifted identity], R = [1, ma]
//
// Everything is computed with unit innovation variance; callers scale by
// sigma^2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tweetcast::sarimax {

class ArmaStateSpace {
 public:
  /// `ar[j]` multiplies w_{t-1-j}; `ma[j]` multiplies eps_{t-1-j}.
  ArmaStateSpace(std::vector<double> ar, std::vector<double> ma)
      : dim_(std::max(ar.size(), ma.size() + 1)), ar_(dim_, 0.0), r_(dim_, 0.0) {
    std::copy(ar.begin(), ar.end(), ar_.begin());
    r_[0] = 1.0;
    std::copy(ma.begin(), ma.end(), r_.begin() + 1);
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& ar() const noexcept { return ar_; }
  const std::vector<double>& r() const noexcept { return r_; }

  /// x <- T x.
  void apply_t(std::span<double> x) const {
    const double head = x[0];
    for (std::size_t i = 0; i + 1 < dim_; ++i) x[i] = ar_[i] * head + x[i + 1];
    x[dim_ - 1] = ar_[dim_ - 1] * head;
  }

  /// P <- T P T' + R R' for a symmetric row-major P.
  void propagate_covariance(std::vector<double>& P) const {
    const std::size_t L = dim_;
    std::vector<double> M(L * L);
    // M = T P, row i = ar_i * P_0 + P_{i+1}
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) M[i * L + j] = ar_[i] * P[j] + (i + 1 < L ? P[(i + 1) * L + j] : 0.0);
    // P = M T' = (T M')'; element (i, j) = ar_j * M(i, 0) + M(i, j + 1)
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j)
        P[i * L + j] = ar_[j] * M[i * L] + (j + 1 < L ? M[i * L + j + 1] : 0.0) + r_[i] * r_[j];
  }

  /// Solves P = T P T' + R R' by the doubling iteration. Returns false when
  /// it fails to converge (T not stable).
  bool stationary_covariance(std::vector<double>& P_out) const {
    const auto L = static_cast<Eigen::Index>(dim_);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L, L);
    for (Eigen::Index i = 0; i < L; ++i) {
      A(i, 0) = ar_[static_cast<std::size_t>(i)];
      if (i + 1 < L) A(i, i + 1) = 1.0;
    }
    Eigen::VectorXd R(L);
    for (Eigen::Index i = 0; i < L; ++i) R(i) = r_[static_cast<std::size_t>(i)];
    Eigen::MatrixXd P = R * R.transpose();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      Eigen::MatrixXd inc = A * P * A.transpose();
      P += inc;
      if (!P.allFinite()) return false;
      if (inc.cwiseAbs().maxCoeff() <= 1e-15 * P.cwiseAbs().maxCoeff()) {
        converged = true;
        break;
      }
      A = A * A;
    }
    if (!converged) return false;
    P = 0.5 * (P + P.transpose()).eval();
    P_out.assign(dim_ * dim_, 0.0);
    for (Eigen::Index i = 0; i < L; ++i)
      for (Eigen::Index j = 0; j < L; ++j) P_out[static_cast<std::size_t>(i * L + j)] = P(i, j);
    return true;
  }

 private:
  std::size_t dim_;
  std::vector<double> ar_;
  std::vector<double> r_;
};

/// Output of one filter pass over several series sharing the same model.
struct FilterOutput {
  /// innovations[c][t] for series c.
  std::vector<std::vector<double>> innovations;
  /// Innovation variance at t in units of sigma^2.
  std::vector<double> F;
  /// Predicted state mean (per series) and covariance for the step after the
  /// last observation.
  std::vector<std::vector<double>> next_state;
  std::vector<double> next_cov;
  bool ok = true;
};

/// Runs the Kalman filter over each column of `series` (all of equal length)
/// starting from a zero mean and the stationary covariance.
inline FilterOutput kalman_filter(const ArmaStateSpace& model, const std::vector<std::span<const double>>& series) {
  FilterOutput out;
  const std::size_t L = model.dim();
  const std::size_t C = series.size();
  const std::size_t n = C ? series.front().size() : 0;
  std::vector<double> P;
  if (!model.stationary_covariance(P)) {
    out.ok = false;
    return out;
  }
  std::vector<std::vector<double>> a(C, std::vector<double>(L, 0.0));
  out.innovations.assign(C, std::vector<double>(n));
  out.F.resize(n);
  std::vector<double> Pc(L);
  for (std::size_t t = 0; t < n; ++t) {
    const double F = P[0];
    if (!(F > 0.0) || !std::isfinite(F)) {
      out.ok = false;
      return out;
    }
    out.F[t] = F;
    for (std::size_t i = 0; i < L; ++i) Pc[i] = P[i * L];
    for (std::size_t c = 0; c < C; ++c) {
      const double v = series[c][t] - a[c][0];
      out.innovations[c][t] = v;
      const double gain = v / F;
      for (std::size_t i = 0; i < L; ++i) a[c][i] += Pc[i] * gain;
      model.apply_t(a[c]);
    }
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) P[i * L + j] -= Pc[i] * Pc[j] / F;
    model.propagate_covariance(P);
  }
  out.next_state = std::move(a);
  out.next_cov = std::move(P);
  return out;
}

}  // namespace tweetcast::sarimax
