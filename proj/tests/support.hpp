#pragma once

// Simulators and independent reference computations shared by the unit tests
// and the acceptance runner. Nothing here calls into the code under test
// except for plain data types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include <fstream>
#include <map>
#include <set>
#include <string>

#include "tweetcast/common.hpp"
#include "tweetcast/corpus.hpp"
#include "tweetcast/time.hpp"

namespace tweetcast::testing {

/// ARMA simulation by direct recursion, with a burn-in long enough for the
/// start-up transient to vanish. `ar` and `ma` are full lag coefficient
/// vectors (index j multiplies lag j + 1), so seasonal models are passed as
/// their expanded product polynomials.
inline std::vector<double> simulate_arma(Rng& rng, std::size_t n, const std::vector<double>& ar,
                                         const std::vector<double>& ma, double sigma = 1.0, std::size_t burn = 500) {
  const std::size_t total = n + burn;
  std::vector<double> x(total, 0.0), e(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    e[t] = rng.normal(0.0, sigma);
    double v = e[t];
    for (std::size_t j = 0; j < ar.size() && j < t; ++j) v += ar[j] * x[t - 1 - j];
    for (std::size_t j = 0; j < ma.size() && j < t; ++j) v += ma[j] * e[t - 1 - j];
    x[t] = v;
  }
  return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// log N(x; 0, S) through a Cholesky factorisation.
inline double mvn_logpdf(const std::vector<double>& x, const Eigen::MatrixXd& S) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = x[static_cast<std::size_t>(i)];
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  const Eigen::VectorXd z = llt.matrixL().solve(v);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + z.squaredNorm());
}

inline Eigen::MatrixXd ar1_covariance(std::size_t n, double phi, double sigma2) {
  Eigen::MatrixXd S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      S(i, j) = sigma2 * std::pow(phi, std::abs(static_cast<double>(i) - static_cast<double>(j))) / (1.0 - phi * phi);
  return S;
}

inline Eigen::MatrixXd ma1_covariance(std::size_t n, double theta, double sigma2) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    S(i, i) = sigma2 * (1.0 + theta * theta);
    if (i + 1 < n) S(i, i + 1) = S(i + 1, i) = sigma2 * theta;
  }
  return S;
}

/// Corpus drawn from a planted LDA model whose topics use disjoint blocks of
/// `words_per_topic` terms. Term ids are the column ids of the matrix.
struct PlantedCorpus {
  DocTermMatrix dtm;
  std::vector<std::vector<double>> phi;  // K x V
};

inline PlantedCorpus planted_corpus(Rng& rng, std::size_t K, std::size_t docs, std::size_t tokens_per_doc,
                                    std::size_t words_per_topic = 20, double doc_alpha = 0.3) {
  const std::size_t V = K * words_per_topic;
  PlantedCorpus out;
  out.phi.assign(K, std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const auto w = rng.dirichlet(words_per_topic, 2.0);
    for (std::size_t j = 0; j < words_per_topic; ++j) out.phi[k][k * words_per_topic + j] = w[j];
  }
  std::vector<DtmEntry> entries;
  for (std::size_t d = 0; d < docs; ++d) {
    const auto theta = rng.dirichlet(K, doc_alpha);
    std::vector<std::uint32_t> counts(V, 0);
    for (std::size_t i = 0; i < tokens_per_doc; ++i) ++counts[rng.categorical(out.phi[rng.categorical(theta)])];
    for (std::size_t w = 0; w < V; ++w)
      if (counts[w]) entries.push_back({d, w, counts[w]});
  }
  out.dtm = DocTermMatrix(docs, V, std::move(entries));
  return out;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

/// Largest per-topic total-variation distance under the best matching of
/// estimated to true topics (exhaustive over permutations; K is small).
inline double best_permutation_tv(const std::vector<std::vector<double>>& estimated,
                                  const std::vector<std::vector<double>>& truth) {
  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) worst = std::max(worst, total_variation(estimated[perm[k]], truth[k]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Made-up words that the stemmer leaves alone and that are not stopwords.
inline std::vector<std::string> invented_words(Rng& rng, std::size_t n, std::set<std::string>& taken) {
  static const char* consonants = "bdfgkmpvz";
  static const char* vowels = "aou";
  std::vector<std::string> out;
  while (out.size() < n) {
    std::string w;
    for (int syl = 0; syl < 3; ++syl) {
      w += consonants[rng.below(9)];
      w += vowels[rng.below(3)];
    }
    w += "kpt"[rng.below(3)];
    if (stem(w) != w || default_stopwords().count(w) || !taken.insert(w).second) continue;
    out.push_back(w);
  }
  return out;
}

/// A tweet stream with planted topics, a planted count spike and a known
/// sentiment signal, plus the features an exact reimplementation of the
/// resampling would produce (computed here independently).
struct SyntheticStream {
  std::vector<std::string> jsonl;  // one record per line
  std::vector<std::string> words;  // topic k owns words[k * per_topic, (k + 1) * per_topic)
  std::size_t per_topic = 0;
  std::vector<std::vector<double>> phi;         // K x (K * per_topic)
  std::map<std::string, double> lexicon;        // sentiment words and polarities
  std::vector<double> count, sentiment_per_tweet;  // per bucket, spike bucket zeroed
  std::size_t spike_bucket = 0;
  std::int64_t start = 0, interval = 300;
};

inline SyntheticStream synthetic_stream(std::uint64_t seed, std::size_t buckets, std::size_t spike_bucket,
                                        double tweets_per_bucket = 20.0, std::size_t K = 3) {
  Rng rng(seed);
  SyntheticStream s;
  s.spike_bucket = spike_bucket;
  s.start = detail::days_from_civil(2021, 3, 1) * 86400;
  const std::size_t content = 20, sentiment = 4;
  s.per_topic = content + sentiment;
  std::set<std::string> taken;
  s.words = invented_words(rng, K * s.per_topic, taken);
  const double polarity[3][4] = {{0.8, 0.6, 0.5, 0.3}, {-0.8, -0.6, -0.4, -0.2}, {0.6, -0.6, 0.3, -0.3}};
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < sentiment; ++j) s.lexicon[s.words[k * s.per_topic + content + j]] = polarity[k % 3][j];
  const std::size_t V = K * s.per_topic;
  s.phi.assign(K, std::vector<double>(V, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    const auto w = rng.dirichlet(s.per_topic, 2.0);
    for (std::size_t j = 0; j < s.per_topic; ++j) s.phi[k][k * s.per_topic + j] = w[j];
  }

  std::size_t id = 0;
  for (std::size_t b = 0; b < buckets; ++b) {
    const auto theta = rng.dirichlet(K, 0.3);
    std::size_t n = rng.poisson(tweets_per_bucket);
    if (n == 0) n = 1;
    if (b == spike_bucket) n *= 100;
    double polarity_sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t z = rng.categorical(theta);
      std::string text = rng.uniform() < 0.5 ? "The " : "";
      double matched = 0.0;
      std::size_t hits = 0;
      for (int t = 0; t < 8; ++t) {
        const auto& w = s.words[rng.categorical(s.phi[z])];
        if (auto it = s.lexicon.find(w); it != s.lexicon.end()) {
          matched += it->second;
          ++hits;
        }
        text += (t == 3 ? "#" : "") + w + (t == 5 ? "!! " : " ");
      }
      text += "http://t.co/x" + std::to_string(i) + " @user" + std::to_string(i % 7);
      const bool excluded = rng.uniform() < 0.05;
      const std::int64_t ts = s.start + static_cast<std::int64_t>(b) * s.interval +
                              static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(s.interval)));
      nlohmann::json j = {{"id", "t" + std::to_string(id++)},
                          {"created_at", format_iso8601(UtcTime{ts})},
                          {"text", text},
                          {"likes", rng.below(50)},
                          {"retweets", rng.below(10)},
                          {"query", excluded ? "Climate Change" : "Environment"}};
      s.jsonl.push_back(j.dump());
      if (excluded) continue;
      ++kept;
      polarity_sum += hits ? matched / static_cast<double>(hits) : 0.0;
    }
    const bool removed = b == spike_bucket;
    s.count.push_back(removed ? 0.0 : static_cast<double>(kept));
    s.sentiment_per_tweet.push_back(removed || kept == 0 ? 0.0 : polarity_sum / static_cast<double>(kept));
  }
  return s;
}

}  // namespace tweetcast::testing
