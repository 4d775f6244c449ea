#pragma once

// Exact (O(N^2)) t-SNE into two dimensions.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tweetcast/common.hpp"

namespace tweetcast {

using Points = std::vector<std::vector<double>>;
using Coords2D = std::vector<std::array<double, 2>>;

struct AffinityMatrix {
  std::size_t n = 0;
  std::vector<double> P;  // n x n row-major, symmetric, zero diagonal, sums to 1
  double perplexity = 0.0;
  std::vector<double> sigmas;
  std::vector<double> achieved_perplexity;
  /// Points whose bandwidth search hit the iteration cap.
  std::size_t unconverged = 0;

  double operator()(std::size_t i, std::size_t j) const { return P[i * n + j]; }
};

struct ConditionalAffinities {
  std::size_t n = 0;
  std::vector<double> p;  // row i holds p_{j|i}
  std::vector<double> sigmas;
  std::vector<double> achieved_perplexity;
  std::size_t unconverged = 0;
};

inline std::vector<double> squared_distances(const Points& X) {
  const std::size_t n = X.size();
  std::vector<double> D(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t f = 0; f < X[i].size(); ++f) s += (X[i][f] - X[j][f]) * (X[i][f] - X[j][f]);
      D[i * n + j] = D[j * n + i] = s;
    }
  return D;
}

/// Gaussian conditionals p_{j|i} whose Shannon perplexity matches the target,
/// found by bisection on the precision 1/(2 sigma^2).
inline ConditionalAffinities conditional_affinities(const Points& X, double perplexity) {
  const std::size_t n = X.size();
  if (n < 3) throw insufficient_data("t-SNE needs at least 3 points");
  for (const auto& row : X)
    if (row.size() != X.front().size()) throw DataError("alignment", "input rows have different widths");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n))
    throw ConfigError("perplexity must lie in (0, N); got " + format_double(perplexity));

  const auto D = squared_distances(X);
  ConditionalAffinities out;
  out.n = n;
  out.p.assign(n * n, 0.0);
  out.sigmas.resize(n);
  out.achieved_perplexity.resize(n);
  const double target = std::log(perplexity);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = inf;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, D[i * n + j]);
    double beta = 1.0, lo = -inf, hi = inf, entropy = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 64; ++iter) {
      double sum = 0.0, weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double d = D[i * n + j] - dmin;
        row[j] = std::exp(-beta * d);
        sum += row[j];
        weighted += d * row[j];
      }
      entropy = std::log(sum) + beta * weighted / sum;
      for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-5) {
        converged = true;
        break;
      }
      if (diff > 0) {
        lo = beta;
        beta = hi == inf ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = lo == -inf ? beta / 2.0 : 0.5 * (beta + lo);
      }
    }
    if (!converged) ++out.unconverged;
    std::copy(row.begin(), row.end(), out.p.begin() + static_cast<std::ptrdiff_t>(i * n));
    out.sigmas[i] = std::sqrt(1.0 / (2.0 * beta));
    out.achieved_perplexity[i] = std::exp(entropy);
  }
  return out;
}

/// P_ij = (p_{j|i} + p_{i|j}) / 2N.
inline AffinityMatrix pairwise_affinities(const Points& X, double perplexity) {
  auto cond = conditional_affinities(X, perplexity);
  const std::size_t n = cond.n;
  AffinityMatrix a;
  a.n = n;
  a.P.assign(n * n, 0.0);
  a.perplexity = perplexity;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) a.P[i * n + j] = (cond.p[i * n + j] + cond.p[j * n + i]) / (2.0 * static_cast<double>(n));
  a.sigmas = std::move(cond.sigmas);
  a.achieved_perplexity = std::move(cond.achieved_perplexity);
  a.unconverged = cond.unconverged;
  return a;
}

namespace detail {

/// Student-t kernel values w_ij = 1 / (1 + |y_i - y_j|^2) and their sum.
inline double student_kernel(const Coords2D& Y, std::vector<double>& W) {
  const std::size_t n = Y.size();
  W.assign(n * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = Y[i][0] - Y[j][0], dy = Y[i][1] - Y[j][1];
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      W[i * n + j] = W[j * n + i] = w;
      total += 2.0 * w;
    }
  return total;
}

}  // namespace detail

/// sum_{i != j} P_ij log(P_ij / Q_ij), with 0 log 0 = 0.
inline double kl_divergence(const AffinityMatrix& P, const Coords2D& Y) {
  if (Y.size() != P.n) throw DataError("alignment", "embedding and affinity sizes differ");
  std::vector<double> W;
  const double Z = detail::student_kernel(Y, W);
  double kl = 0.0;
  for (std::size_t i = 0; i < P.n; ++i)
    for (std::size_t j = 0; j < P.n; ++j) {
      const double p = P.P[i * P.n + j];
      if (i == j || p <= 0.0) continue;
      kl += p * std::log(p / (W[i * P.n + j] / Z));
    }
  return kl;
}

/// dC/dy_i = 4 sum_j (e P_ij - Q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2), e the
/// exaggeration factor.
inline Coords2D kl_gradient(const AffinityMatrix& P, const Coords2D& Y, double exaggeration = 1.0) {
  const std::size_t n = P.n;
  std::vector<double> W;
  const double Z = detail::student_kernel(Y, W);
  Coords2D g(n, {0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double w = W[i * n + j];
      const double m = 4.0 * (exaggeration * P.P[i * n + j] - w / Z) * w;
      g[i][0] += m * (Y[i][0] - Y[j][0]);
      g[i][1] += m * (Y[i][1] - Y[j][1]);
    }
  return g;
}

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  std::uint64_t seed = 20;
  double learning_rate = 200.0;
  double exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  std::size_t momentum_switch = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  /// Record the KL divergence every this many iterations (0 disables).
  std::size_t kl_every = 50;
};

struct Embedding2D {
  Coords2D Y;
  double kl_final = 0.0;
  std::size_t iterations_run = 0;
  double perplexity_used = 0.0;
  double learning_rate_used = 0.0;
  std::vector<std::pair<std::size_t, double>> kl_trace;
};

/// Perplexity is lowered to (N - 1) / 3 for small inputs, but not below
/// min(2, N - 1): a perplexity under one effective neighbour cannot be met.
inline double effective_perplexity(double requested, std::size_t n) {
  const double m = static_cast<double>(n) - 1.0;
  return std::min(requested, std::max(m / 3.0, std::min(2.0, m)));
}

/// The step size is lowered to N / 4 for small inputs, but not below 50.
/// With few points the normaliser of Q is small, so a near-collision between
/// two points produces a repulsive step large enough to fling one of them out
/// of the layout, and the objective then climbs after exaggeration ends.
inline double effective_learning_rate(double requested, std::size_t n) {
  return std::min(requested, std::max(static_cast<double>(n) / 4.0, 50.0));
}

inline Embedding2D tsne(const AffinityMatrix& P, const TsneConfig& config) {
  const std::size_t n = P.n;
  Embedding2D out;
  out.perplexity_used = P.perplexity;
  const double learning_rate = effective_learning_rate(config.learning_rate, n);
  out.learning_rate_used = learning_rate;
  Rng rng(config.seed);
  out.Y.resize(n);
  for (auto& y : out.Y) y = {rng.normal(0.0, 1e-4), rng.normal(0.0, 1e-4)};
  Coords2D velocity(n, {0.0, 0.0});
  Coords2D gains(n, {1.0, 1.0});

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const bool early = it < config.exaggeration_iterations;
    const double momentum = it < config.momentum_switch ? config.initial_momentum : config.final_momentum;
    const auto g = kl_gradient(P, out.Y, early ? config.exaggeration : 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) {
        if (!std::isfinite(g[i][c]))
          throw NumericError("non_finite_gradient", "t-SNE gradient is not finite at iteration " + std::to_string(it));
        // Per-coordinate adaptive gains (delta-bar-delta).
        gains[i][c] = (g[i][c] > 0.0) != (velocity[i][c] > 0.0) ? gains[i][c] + 0.2 : gains[i][c] * 0.8;
        gains[i][c] = std::max(gains[i][c], 0.01);
        velocity[i][c] = momentum * velocity[i][c] - learning_rate * gains[i][c] * g[i][c];
        out.Y[i][c] += velocity[i][c];
      }
    double mx = 0.0, my = 0.0;
    for (const auto& y : out.Y) {
      mx += y[0];
      my += y[1];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (auto& y : out.Y) {
      y[0] -= mx;
      y[1] -= my;
    }
    out.iterations_run = it + 1;
    if (config.kl_every && (it + 1) % config.kl_every == 0) out.kl_trace.emplace_back(it + 1, kl_divergence(P, out.Y));
  }
  out.kl_final = kl_divergence(P, out.Y);
  return out;
}

inline Embedding2D tsne(const Points& X, const TsneConfig& config) {
  const auto P = pairwise_affinities(X, effective_perplexity(config.perplexity, X.size()));
  return tsne(P, config);
}

/// Elementwise square root, so Euclidean distance becomes (scaled) Hellinger
/// distance between probability rows.
inline Points hellinger_transform(Points X) {
  for (auto& row : X)
    for (auto& x : row) x = std::sqrt(std::max(x, 0.0));
  return X;
}

}  // namespace tweetcast
