#pragma once

// Latent Dirichlet Allocation fitted by collapsed Gibbs sampling.
//
// Notation in comments: n_dk tokens of doc d in topic k, n_kw tokens of word w
// in topic k, n_k tokens in topic k, V vocabulary size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tweetcast/common.hpp"
#include "tweetcast/corpus.hpp"
#include "tweetcast/timegrid.hpp"

namespace tweetcast {

struct LdaConfig {
  std::size_t n_topics = 3;
  /// Symmetric document-topic prior; defaults to 50 / n_topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::size_t burn_in = 800;
  std::uint64_t seed = 20;
  /// Verify the count tables after every sweep (throws on violation).
  bool check_invariants = false;

  double alpha_value() const { return alpha ? *alpha : 50.0 / static_cast<double>(n_topics); }

  void validate() const {
    if (n_topics < 1) throw ConfigError("n_topics must be at least 1");
    if (!(alpha_value() > 0.0)) throw ConfigError("alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (burn_in >= iterations) throw ConfigError("burn_in must be smaller than iterations");
  }
};

using Matrix = std::vector<std::vector<double>>;

struct LdaModel {
  LdaConfig config;
  Matrix phi;    // K x V
  Matrix theta;  // D x K
  std::vector<std::vector<std::uint32_t>> assignments;  // per doc, per token position
  std::vector<double> loglik_trace;
  std::size_t skipped_empty_docs = 0;
  std::uint64_t vocabulary_hash = 0;

  std::size_t n_topics() const { return phi.size(); }
  std::size_t n_terms() const { return phi.empty() ? 0 : phi.front().size(); }
  std::size_t n_docs() const { return theta.size(); }
};

namespace detail {

/// Count state of the collapsed sampler.
struct GibbsState {
  std::size_t K = 0, V = 0, D = 0;
  std::vector<std::vector<std::uint32_t>> words;  // token word ids per doc
  std::vector<std::vector<std::uint32_t>> z;      // token topics per doc
  std::vector<std::uint32_t> n_dk;                // D x K
  std::vector<std::uint32_t> n_kw;                // K x V
  std::vector<std::uint32_t> n_k;                 // K

  std::uint32_t& dk(std::size_t d, std::size_t k) { return n_dk[d * K + k]; }
  std::uint32_t& kw(std::size_t k, std::size_t w) { return n_kw[k * V + w]; }

  void assign(std::size_t d, std::size_t i, std::uint32_t k, int delta) {
    const std::uint32_t w = words[d][i];
    dk(d, k) += delta;
    kw(k, w) += delta;
    n_k[k] += delta;
  }

  void check() {
    std::uint64_t total = 0, topic_total = 0;
    for (std::size_t d = 0; d < D; ++d) {
      std::uint64_t s = 0;
      for (std::size_t k = 0; k < K; ++k) s += dk(d, k);
      if (s != words[d].size()) throw NumericError("lda_invariant", "sum_k n_dk != n_d for doc " + std::to_string(d));
      total += s;
    }
    for (std::size_t k = 0; k < K; ++k) {
      std::uint64_t s = 0;
      for (std::size_t w = 0; w < V; ++w) s += kw(k, w);
      if (s != n_k[k]) throw NumericError("lda_invariant", "sum_w n_kw != n_k for topic " + std::to_string(k));
      topic_total += n_k[k];
    }
    if (topic_total != total) throw NumericError("lda_invariant", "sum_k n_k != total tokens");
    std::vector<std::uint32_t> recount(n_kw.size(), 0);
    for (std::size_t d = 0; d < D; ++d)
      for (std::size_t i = 0; i < words[d].size(); ++i) ++recount[z[d][i] * V + words[d][i]];
    if (recount != n_kw) throw NumericError("lda_invariant", "n_kw disagrees with the assignments");
  }

  /// log p(w, z | alpha, beta).
  double joint_loglik(double alpha, double beta) const {
    const double Vb = static_cast<double>(V) * beta;
    const double Ka = static_cast<double>(K) * alpha;
    double ll = static_cast<double>(K) * (std::lgamma(Vb) - static_cast<double>(V) * std::lgamma(beta));
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t w = 0; w < V; ++w) {
        const auto c = n_kw[k * V + w];
        if (c) ll += std::lgamma(c + beta) - std::lgamma(beta);
      }
      ll -= std::lgamma(n_k[k] + Vb) - std::lgamma(Vb);
    }
    for (std::size_t d = 0; d < D; ++d) {
      if (words[d].empty()) continue;
      for (std::size_t k = 0; k < K; ++k) {
        const auto c = n_dk[d * K + k];
        if (c) ll += std::lgamma(c + alpha) - std::lgamma(alpha);
      }
      ll -= std::lgamma(words[d].size() + Ka) - std::lgamma(Ka);
    }
    return ll;
  }
};

inline std::vector<std::vector<std::uint32_t>> expand_tokens(const DocTermMatrix& dtm) {
  std::vector<std::vector<std::uint32_t>> words(dtm.n_docs());
  for (std::size_t d = 0; d < dtm.n_docs(); ++d)
    for (const auto& e : dtm.row(d)) words[d].insert(words[d].end(), e.count, static_cast<std::uint32_t>(e.term));
  return words;
}

}  // namespace detail

/// Runs `iterations` full sweeps of the collapsed sampler and estimates
/// phi/theta from the final state. Identical inputs and seed give a
/// bit-identical model.
inline LdaModel fit_lda(const DocTermMatrix& dtm, const LdaConfig& config) {
  config.validate();
  if (dtm.n_docs() == 0 || dtm.n_terms() == 0) throw insufficient_data("LDA needs a non-empty document-term matrix");
  const std::uint64_t total = dtm.total();
  if (config.n_topics > total) {
    throw ConfigError("n_topics (" + std::to_string(config.n_topics) + ") exceeds the token count (" +
                      std::to_string(total) + ")");
  }
  const std::size_t K = config.n_topics;
  const double alpha = config.alpha_value();
  const double beta = config.beta;

  detail::GibbsState s;
  s.K = K;
  s.V = dtm.n_terms();
  s.D = dtm.n_docs();
  s.words = detail::expand_tokens(dtm);
  s.z.resize(s.D);
  s.n_dk.assign(s.D * K, 0);
  s.n_kw.assign(K * s.V, 0);
  s.n_k.assign(K, 0);

  LdaModel model;
  model.config = config;
  Rng rng(config.seed);
  for (std::size_t d = 0; d < s.D; ++d) {
    if (s.words[d].empty()) ++model.skipped_empty_docs;
    s.z[d].resize(s.words[d].size());
    for (std::size_t i = 0; i < s.words[d].size(); ++i) {
      s.z[d][i] = static_cast<std::uint32_t>(rng.below(K));
      s.assign(d, i, s.z[d][i], +1);
    }
  }

  const double Vb = static_cast<double>(s.V) * beta;
  std::vector<double> cdf(K);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (std::size_t d = 0; d < s.D; ++d) {
      const std::uint32_t* doc_counts = &s.n_dk[d * K];
      for (std::size_t i = 0; i < s.words[d].size(); ++i) {
        const std::uint32_t w = s.words[d][i];
        s.assign(d, i, s.z[d][i], -1);
        // p(z = k | rest) ∝ (n_dk + alpha)(n_kw + beta) / (n_k + V beta)
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (doc_counts[k] + alpha) * (s.n_kw[k * s.V + w] + beta) / (s.n_k[k] + Vb);
          cdf[k] = acc;
        }
        const double u = rng.uniform() * acc;
        std::uint32_t k = 0;
        while (k + 1 < K && cdf[k] <= u) ++k;
        s.z[d][i] = k;
        s.assign(d, i, k, +1);
      }
    }
    if (config.check_invariants) s.check();
    model.loglik_trace.push_back(s.joint_loglik(alpha, beta));
  }

  model.phi.assign(K, std::vector<double>(s.V));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < s.V; ++w) model.phi[k][w] = (s.kw(k, w) + beta) / (s.n_k[k] + Vb);
  const double Ka = static_cast<double>(K) * alpha;
  model.theta.assign(s.D, std::vector<double>(K));
  for (std::size_t d = 0; d < s.D; ++d)
    for (std::size_t k = 0; k < K; ++k)
      model.theta[d][k] = (s.dk(d, k) + alpha) / (static_cast<double>(s.words[d].size()) + Ka);
  model.assignments = std::move(s.z);
  return model;
}

/// Held-out log-likelihood of each document with phi fixed, by document
/// completion: the topic mixture is folded in by `sweeps` Gibbs sweeps over
/// the even-position tokens (averaged over the second half of the sweeps),
/// and only the odd-position tokens are scored. Scoring the fold-in tokens
/// themselves would reward larger K for fitting each document better. A
/// one-token document is scored under the prior mixture; empty documents
/// contribute nothing.
///
/// `fold_in_alpha` is the symmetric prior used while folding in. Model
/// comparison uses kFoldInAlpha rather than the fitted 50 / K: with the
/// total prior mass fixed at 50, a true topic split over m fitted topics
/// would collect m times the prior mass and make larger K look better.
inline constexpr double kFoldInAlpha = 1.0;

struct HeldOutDoc {
  double loglik = 0.0;
  std::uint64_t tokens = 0;
};

inline std::vector<HeldOutDoc> heldout_loglik(const Matrix& phi, double fold_in_alpha, const DocTermMatrix& dtm,
                                              std::uint64_t seed, std::size_t sweeps = 20) {
  const std::size_t K = phi.size();
  if (K == 0 || phi.front().size() != dtm.n_terms())
    throw DataError("alignment", "document-term matrix vocabulary does not match the model");
  if (!(fold_in_alpha > 0.0)) throw ConfigError("fold-in prior must be positive");
  const double alpha = fold_in_alpha;
  const auto words = detail::expand_tokens(dtm);
  Rng rng(seed);
  std::vector<HeldOutDoc> out(words.size());
  std::vector<double> cdf(K), theta(K);
  std::vector<std::uint32_t> seen, scored;
  for (std::size_t d = 0; d < words.size(); ++d) {
    const auto& doc = words[d];
    if (doc.empty()) continue;
    seen.clear();
    scored.clear();
    if (doc.size() == 1) scored.push_back(doc[0]);
    else
      for (std::size_t i = 0; i < doc.size(); ++i) (i % 2 == 0 ? seen : scored).push_back(doc[i]);

    Rng doc_rng = rng.split(d);
    std::vector<std::uint32_t> z(seen.size());
    std::vector<std::uint32_t> n_k(K, 0);
    for (auto& zi : z) ++n_k[zi = static_cast<std::uint32_t>(doc_rng.below(K))];
    const double denom = static_cast<double>(seen.size()) + static_cast<double>(K) * alpha;
    std::fill(theta.begin(), theta.end(), 0.0);
    std::size_t samples = 0;
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
      for (std::size_t i = 0; i < seen.size(); ++i) {
        --n_k[z[i]];
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) cdf[k] = (acc += (n_k[k] + alpha) * phi[k][seen[i]]);
        const double u = doc_rng.uniform() * acc;
        std::uint32_t k = 0;
        while (k + 1 < K && cdf[k] <= u) ++k;
        ++n_k[z[i] = k];
      }
      if (2 * (sweep + 1) > sweeps) {
        for (std::size_t k = 0; k < K; ++k) theta[k] += (n_k[k] + alpha) / denom;
        ++samples;
      }
    }
    if (samples == 0) {
      for (std::size_t k = 0; k < K; ++k) theta[k] = (n_k[k] + alpha) / denom;
    } else {
      for (auto& t : theta) t /= static_cast<double>(samples);
    }
    for (const auto w : scored) {
      double p = 0.0;
      for (std::size_t k = 0; k < K; ++k) p += theta[k] * phi[k][w];
      if (!(p > 0.0)) throw NumericError("lda_invariant", "zero-probability token in perplexity");
      out[d].loglik += std::log(p);
      ++out[d].tokens;
    }
  }
  return out;
}

/// exp(-held-out log-likelihood / scored tokens).
inline double perplexity(const Matrix& phi, double fold_in_alpha, const DocTermMatrix& dtm, std::uint64_t seed,
                         std::size_t sweeps = 20) {
  double loglik = 0.0;
  std::uint64_t total = 0;
  for (const auto& d : heldout_loglik(phi, fold_in_alpha, dtm, seed, sweeps)) {
    loglik += d.loglik;
    total += d.tokens;
  }
  if (total == 0) throw insufficient_data("perplexity needs at least one token");
  return std::exp(-loglik / static_cast<double>(total));
}

inline double perplexity(const LdaModel& model, const DocTermMatrix& dtm, std::size_t sweeps = 20) {
  return perplexity(model.phi, kFoldInAlpha, dtm, model.config.seed ^ 0x5eedULL, sweeps);
}

struct KSelection {
  std::size_t best_k = 0;
  std::vector<std::pair<std::size_t, double>> perplexity_by_k;
  /// K with the lowest held-out perplexity, before the one-standard-error rule.
  std::size_t min_perplexity_k = 0;
};

/// Fits one model per K on a seeded 90/10 document split and scores the
/// held-out documents. The chosen K is the smallest one whose mean paired
/// per-document log-likelihood gap to the minimum-perplexity K is within one
/// standard error of that gap: with a few held-out documents, perplexity
/// differences between neighbouring K are mostly sampling noise, and plain
/// argmin then drifts towards the largest K tried. `config.alpha`, when set,
/// is used for every K; otherwise each K uses 50 / K.
inline KSelection select_k(const DocTermMatrix& dtm, std::size_t k_min, std::size_t k_max, const LdaConfig& config) {
  if (k_min < 1 || k_min > k_max) throw ConfigError("invalid topic-count range");
  if (dtm.n_docs() < 2) throw insufficient_data("topic-count selection needs at least 2 documents");
  std::vector<std::size_t> order(dtm.n_docs());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(config.seed).split(0x4b);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  const std::size_t n_test = std::max<std::size_t>(1, dtm.n_docs() / 10);
  std::vector<std::size_t> test(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
  std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_test));
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  const auto train_dtm = dtm.select_rows(train);
  const auto test_dtm = dtm.select_rows(test);

  KSelection out;
  std::vector<std::vector<HeldOutDoc>> per_doc;
  double best = 0.0;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    LdaConfig c = config;
    c.n_topics = k;
    const auto model = fit_lda(train_dtm, c);
    per_doc.push_back(heldout_loglik(model.phi, kFoldInAlpha, test_dtm, c.seed ^ 0x5eedULL));
    double ll = 0.0;
    std::uint64_t total = 0;
    for (const auto& d : per_doc.back()) {
      ll += d.loglik;
      total += d.tokens;
    }
    if (total == 0) throw insufficient_data("held-out documents have no tokens");
    const double p = std::exp(-ll / static_cast<double>(total));
    out.perplexity_by_k.emplace_back(k, p);
    if (out.min_perplexity_k == 0 || p < best) {
      best = p;
      out.min_perplexity_k = k;
    }
  }

  const auto& ref = per_doc[out.min_perplexity_k - k_min];
  out.best_k = out.min_perplexity_k;
  for (std::size_t k = k_min; k < out.min_perplexity_k; ++k) {
    const auto& cur = per_doc[k - k_min];
    std::vector<double> gap;  // per-token log-likelihood lost by using k
    for (std::size_t d = 0; d < ref.size(); ++d)
      if (ref[d].tokens) gap.push_back((ref[d].loglik - cur[d].loglik) / static_cast<double>(ref[d].tokens));
    double mean = 0.0, ss = 0.0;
    for (double g : gap) mean += g;
    mean /= static_cast<double>(gap.size());
    for (double g : gap) ss += (g - mean) * (g - mean);
    const double se = gap.size() > 1 ? std::sqrt(ss / static_cast<double>(gap.size() - 1) /
                                                 static_cast<double>(gap.size()))
                                     : 0.0;
    if (mean <= se) {
      out.best_k = k;
      break;
    }
  }
  return out;
}

/// Highest-probability terms of one topic, lexicographic tie-break.
inline std::vector<std::pair<std::string, double>> top_words(const LdaModel& model, const Vocabulary& vocab,
                                                             std::size_t topic, std::size_t n) {
  if (topic >= model.n_topics()) throw DataError("range", "topic id " + std::to_string(topic) + " out of range");
  if (vocab.size() != model.n_terms()) throw DataError("alignment", "vocabulary does not match the model");
  std::vector<std::size_t> ids(model.n_terms());
  std::iota(ids.begin(), ids.end(), 0);
  const auto& row = model.phi[topic];
  std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return row[a] != row[b] ? row[a] > row[b] : vocab.term(a) < vocab.term(b);
  });
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < std::min(n, ids.size()); ++i) out.emplace_back(vocab.term(ids[i]), row[ids[i]]);
  return out;
}

inline std::size_t argmax_lowest(const std::vector<double>& xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] > xs[best]) best = i;
  return best;
}

struct TopicSeries {
  std::vector<UtcTime> bucket_start;
  std::vector<std::size_t> dominant;
  /// counts[k][b]: tweets of bucket b attributed to topic k.
  std::vector<std::vector<std::size_t>> counts;
};

/// Each bucket's tweets are attributed to its dominant topic.
inline TopicSeries label_buckets(const LdaModel& model, const BucketSeries& series) {
  if (model.n_docs() != series.size()) {
    throw DataError("alignment", "model has " + std::to_string(model.n_docs()) + " documents but the series has " +
                                     std::to_string(series.size()) + " buckets");
  }
  TopicSeries ts;
  ts.counts.assign(model.n_topics(), std::vector<std::size_t>(series.size(), 0));
  for (std::size_t b = 0; b < series.size(); ++b) {
    const std::size_t k = argmax_lowest(model.theta[b]);
    ts.bucket_start.push_back(series.buckets[b].bucket_start);
    ts.dominant.push_back(k);
    ts.counts[k][b] = series.buckets[b].tweet_count;
  }
  return ts;
}

inline nlohmann::json to_json(const LdaModel& m) {
  auto flatten = [](const Matrix& mat) {
    std::vector<double> flat;
    for (const auto& row : mat) flat.insert(flat.end(), row.begin(), row.end());
    return flat;
  };
  return {{"config",
           {{"n_topics", m.config.n_topics},
            {"alpha", m.config.alpha_value()},
            {"beta", m.config.beta},
            {"iterations", m.config.iterations},
            {"burn_in", m.config.burn_in},
            {"seed", m.config.seed}}},
          {"vocabulary_hash", m.vocabulary_hash},
          {"n_topics", m.n_topics()},
          {"n_terms", m.n_terms()},
          {"n_docs", m.n_docs()},
          {"phi", flatten(m.phi)},
          {"theta", flatten(m.theta)},
          {"loglik_trace", m.loglik_trace},
          {"skipped_empty_docs", m.skipped_empty_docs}};
}

inline LdaModel lda_model_from_json(const nlohmann::json& j) {
  LdaModel m;
  const auto& c = j.at("config");
  m.config.n_topics = c.at("n_topics").get<std::size_t>();
  m.config.alpha = c.at("alpha").get<double>();
  m.config.beta = c.at("beta").get<double>();
  m.config.iterations = c.at("iterations").get<std::size_t>();
  m.config.burn_in = c.at("burn_in").get<std::size_t>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.vocabulary_hash = j.at("vocabulary_hash").get<std::uint64_t>();
  const auto K = j.at("n_topics").get<std::size_t>();
  const auto V = j.at("n_terms").get<std::size_t>();
  const auto D = j.at("n_docs").get<std::size_t>();
  const auto phi = j.at("phi").get<std::vector<double>>();
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (phi.size() != K * V || theta.size() != D * K) throw DataError("lda_model", "model arrays have the wrong size");
  m.phi.assign(K, std::vector<double>(V));
  m.theta.assign(D, std::vector<double>(K));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w) m.phi[k][w] = phi[k * V + w];
  for (std::size_t d = 0; d < D; ++d)
    for (std::size_t k = 0; k < K; ++k) m.theta[d][k] = theta[d * K + k];
  m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
  m.skipped_empty_docs = j.value("skipped_empty_docs", std::size_t{0});
  return m;
}

}  // namespace tweetcast
