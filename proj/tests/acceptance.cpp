// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every reference value is computed here independently of
// the code under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "support.hpp"
#include "tweetcast/decompose.hpp"
#include "tweetcast/embed.hpp"
#include "tweetcast/pipeline.hpp"
#include "tweetcast/sarimax/model.hpp"
#include "tweetcast/timegrid.hpp"
#include "tweetcast/topics.hpp"

namespace fs = std::filesystem;
using namespace tweetcast;
using namespace tweetcast::testing;
using sarimax::OrderSpec;
using sarimax::SarimaxParams;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Exact likelihood against a dense multivariate normal density.
Outcome likelihood_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  Rng rng(101);
  const double mu = 0.75, s2 = 1.3;
  auto check = [&](const OrderSpec& o, SarimaxParams p, const Eigen::MatrixXd& S, std::size_t n) {
    std::vector<double> y(n), centred(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = mu + rng.normal(0.0, 1.5);
      centred[i] = y[i] - mu;
    }
    p.intercept = mu;
    p.sigma2 = s2;
    const double ll = sarimax::loglikelihood(y, {}, o, p);
    worst = std::max(worst, std::abs(ll - mvn_logpdf(centred, S)));
  };
  for (std::size_t n = 5; n <= 8; ++n) {
    for (double phi : {-0.5, 0.3, 0.9}) {
      SarimaxParams p;
      p.ar = {phi};
      check({1, 0, 0}, p, ar1_covariance(n, phi, s2), n);
    }
    for (double theta : {-0.4, 0.6}) {
      SarimaxParams p;
      p.ma = {theta};
      check({0, 0, 1}, p, ma1_covariance(n, theta, s2), n);
    }
  }
  const double secs = elapsed(t0);
  return {worst <= 1e-8 && secs < 1.0, "max |loglik - dense MVN| = " + fmt(worst) + " in " + fmt(secs) + " s"};
}

// 2. Parameter recovery and order selection on simulated series.
Outcome parameter_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  int ar_ok = 0, arma_ok = 0, selected = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const auto ar = simulate_arma(rng, 2000, {0.7}, {});
    const auto f1 = sarimax::fit(ar, {}, {1, 0, 0});
    if (std::abs(f1.params.ar[0] - 0.7) <= 0.1) ++ar_ok;

    const auto arma = simulate_arma(rng, 2000, {0.6}, {0.3});
    const auto f2 = sarimax::fit(arma, {}, {1, 0, 1});
    if (std::abs(f2.params.ar[0] - 0.6) <= 0.1 && std::abs(f2.params.ma[0] - 0.3) <= 0.1) ++arma_ok;

    const auto grid = sarimax::grid_search(arma, {}, {2, 2, 0, 0, 0, 0, 1});
    if (grid.best.order == OrderSpec{1, 0, 1}) ++selected;
  }
  const double secs = elapsed(t0);
  return {ar_ok >= 9 && arma_ok >= 9 && selected >= 7 && secs < 120.0,
          "AR(1) " + std::to_string(ar_ok) + "/10, ARMA(1,1) " + std::to_string(arma_ok) + "/10, AIC picks (1,0,1) " +
              std::to_string(selected) + "/10 in " + fmt(secs) + " s"};
}

// 3. Regression coefficient with AR(1) errors.
Outcome exog_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(303);
  const std::size_t n = 2000;
  const auto noise = simulate_arma(rng, n, {0.5}, {});
  std::vector<double> x(n), y(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = rng.normal(0.0, 1.0);
    y[t] = 2.0 * x[t] + noise[t];
  }
  ColumnTable exog;
  exog.add("x", x);
  const auto f = sarimax::fit(y, exog, {1, 0, 0});
  const double beta = f.params.beta_exog.at(0);
  const double secs = elapsed(t0);
  return {beta >= 1.9 && beta <= 2.1 && secs < 10.0, "beta = " + fmt(beta, 6) + " in " + fmt(secs) + " s"};
}

// 4. integrate(difference(y)) == y.
Outcome differencing_round_trip() {
  Rng rng(404);
  std::size_t cases = 0, exact_fail = 0;
  double worst_real = 0.0;
  for (std::size_t d = 0; d <= 2; ++d)
    for (std::size_t D = 0; D <= 1; ++D)
      for (std::size_t s : {1, 4, 12}) {
        if (D > 0 && s < 2) continue;  // seasonal differencing needs s >= 2
        for (int rep = 0; rep < 50; ++rep) {
          const std::size_t n = 40 + rng.below(40);
          // Dyadic rationals: every sum and difference is exact in binary.
          std::vector<double> dyadic(n), real(n);
          for (std::size_t i = 0; i < n; ++i) {
            dyadic[i] = static_cast<double>(static_cast<std::int64_t>(rng.below(1u << 20)) - (1 << 19)) / 1024.0;
            real[i] = rng.normal(0.0, 10.0);
          }
          const auto a = sarimax::difference(dyadic, d, D, s);
          if (sarimax::integrate(a.values, a) != dyadic) ++exact_fail;
          const auto b = sarimax::difference(real, d, D, s);
          const auto back = sarimax::integrate(b.values, b);
          for (std::size_t i = 0; i < n; ++i) worst_real = std::max(worst_real, std::abs(back[i] - real[i]));
          ++cases;
        }
      }
  return {exact_fail == 0 && worst_real <= 1e-9,
          std::to_string(cases) + " series, " + std::to_string(exact_fail) + " inexact dyadic, max real error " +
              fmt(worst_real)};
}

// 5. AIC bookkeeping and RMSE.
Outcome aic_and_rmse() {
  Rng rng(505);
  const std::size_t n = 400;
  const auto e = simulate_arma(rng, n, {0.4}, {0.2});
  std::vector<double> x(n), y(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = rng.normal(0.0, 1.0);
    y[t] = 3.0 + 0.5 * x[t] + e[t] + 0.01 * static_cast<double>(t);
  }
  ColumnTable exog;
  exog.add("x", x);
  const std::vector<OrderSpec> orders = {{1, 0, 0}, {0, 0, 1}, {1, 0, 1}, {2, 0, 1}, {1, 1, 1},
                                         {1, 0, 0, 1, 0, 0, 4}, {0, 1, 1, 0, 1, 1, 4}};
  double worst_aic = 0.0, worst_ll = 0.0;
  for (const auto& o : orders) {
    for (bool with_exog : {false, true}) {
      const ColumnTable ex = with_exog ? exog : ColumnTable{};
      const auto f = sarimax::fit(y, ex, o);
      const double k = static_cast<double>(o.p + o.q + o.P + o.Q + (with_exog ? 1 : 0) + 2);
      worst_aic = std::max(worst_aic, std::abs(f.aic - (2.0 * k - 2.0 * f.loglik)));
      worst_ll = std::max(worst_ll, std::abs(f.loglik - sarimax::loglikelihood(y, ex, o, f.params)));
    }
  }
  const double r = sarimax::rmse(std::vector<double>{0.0, 2.0});
  return {worst_aic <= 1e-9 && worst_ll <= 1e-6 && r == std::sqrt(2.0),
          "max |aic - (2k - 2ll)| = " + fmt(worst_aic) + ", max loglik recompute gap " + fmt(worst_ll) +
              ", rmse([0,2]) = " + fmt(r, 17)};
}

// 6. Planted topic recovery and topic-count selection.
Outcome topic_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst_tv = 0.0;
  for (std::size_t K : {2, 3}) {
    Rng rng(600 + K);
    const auto corpus = planted_corpus(rng, K, 100, 50);
    LdaConfig c;
    c.n_topics = K;
    const auto m = fit_lda(corpus.dtm, c);
    worst_tv = std::max(worst_tv, best_permutation_tv(m.phi, corpus.phi));
  }
  int picked = 0;
  std::string ks;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(6000 + seed);
    const auto corpus = planted_corpus(rng, 3, 100, 50);
    LdaConfig c;
    c.seed = seed;
    const auto sel = select_k(corpus.dtm, 3, 8, c);
    ks += std::to_string(sel.best_k);
    if (sel.best_k == 3) ++picked;
  }
  const double secs = elapsed(t0);
  return {worst_tv < 0.1 && picked >= 8 && secs < 120.0,
          "max best-permutation TV " + fmt(worst_tv) + ", K = 3 chosen " + std::to_string(picked) +
              "/10 (picks " + ks + ") in " + fmt(secs) + " s"};
}

// 7. Sampler invariants, normalisation and determinism.
Outcome lda_invariants() {
  Rng rng(707);
  const auto corpus = planted_corpus(rng, 3, 60, 40);
  LdaConfig c;
  c.n_topics = 3;
  c.check_invariants = true;
  std::string err;
  LdaModel a;
  try {
    a = fit_lda(corpus.dtm, c);
  } catch (const std::exception& e) {
    err = e.what();
  }
  if (!err.empty()) return {false, "invariant check threw: " + err};
  double worst = 0.0;
  for (const auto* M : {&a.phi, &a.theta})
    for (const auto& row : *M) {
      double s = 0.0;
      for (double x : row) s += x;
      worst = std::max(worst, std::abs(s - 1.0));
    }
  c.check_invariants = false;
  const auto b = fit_lda(corpus.dtm, c);
  const auto c2 = fit_lda(corpus.dtm, c);
  const bool same = to_json(b).dump() == to_json(c2).dump();
  // Invariant checking must not perturb the random stream.
  auto ja = to_json(a), jb = to_json(b);
  ja.erase("config");
  jb.erase("config");
  const bool unperturbed = ja.dump() == jb.dump();
  return {worst <= 1e-9 && same && unperturbed,
          "max |row sum - 1| = " + fmt(worst) + ", seed-20 reruns " + (same ? "byte-identical" : "DIFFER") +
              ", checked run " + (unperturbed ? "matches" : "DIFFERS from") + " unchecked run"};
}

// 8. t-SNE gradient, descent and cluster separation.
Outcome tsne_checks() {
  Rng rng(808);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Points X(8, std::vector<double>(4));
    for (auto& r : X)
      for (auto& v : r) v = rng.normal(0.0, 1.0);
    const auto P = pairwise_affinities(X, 2.5);
    Coords2D Y(8);
    for (auto& y : Y) y = {rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};
    const auto g = kl_gradient(P, Y);
    const double h = 1e-5;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i)
      for (int c = 0; c < 2; ++c) {
        auto Yp = Y, Ym = Y;
        Yp[i][c] += h;
        Ym[i][c] -= h;
        const double fd = (kl_divergence(P, Yp) - kl_divergence(P, Ym)) / (2.0 * h);
        num += (g[i][c] - fd) * (g[i][c] - fd);
        den += fd * fd;
      }
    worst_rel = std::max(worst_rel, std::sqrt(num / den));
  }

  // Two Gaussian clusters in 5 dimensions.
  Points X;
  std::vector<int> label;
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 40; ++i) {
      std::vector<double> row(5);
      for (auto& v : row) v = rng.normal(c == 0 ? 0.0 : 8.0, 1.0);
      X.push_back(row);
      label.push_back(c);
    }
  TsneConfig cfg;
  cfg.kl_every = 50;
  const auto emb = tsne(X, cfg);
  int increases = 0;
  double largest = 0.0;
  for (std::size_t i = 1; i < emb.kl_trace.size(); ++i) {
    if (emb.kl_trace[i - 1].first < cfg.exaggeration_iterations) continue;
    const double up = emb.kl_trace[i].second - emb.kl_trace[i - 1].second;
    if (up > 0.0) {
      ++increases;
      largest = std::max(largest, up);
    }
  }
  double within = 0.0, between = 0.0;
  std::size_t nw = 0, nb = 0;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = i + 1; j < X.size(); ++j) {
      const double dist = std::hypot(emb.Y[i][0] - emb.Y[j][0], emb.Y[i][1] - emb.Y[j][1]);
      if (label[i] == label[j]) {
        within += dist;
        ++nw;
      } else {
        between += dist;
        ++nb;
      }
    }
  within /= static_cast<double>(nw);
  between /= static_cast<double>(nb);
  const bool descent = increases <= 1 && largest < 1e-3;
  return {worst_rel <= 1e-4 && descent && between > within,
          "max gradient rel. error " + fmt(worst_rel) + ", KL increases after exaggeration: " +
              std::to_string(increases) + " (largest " + fmt(largest) + "), mean within/between distance " +
              fmt(within) + "/" + fmt(between)};
}

// 9. Additive decomposition of ramp + square wave.
Outcome decomposition_recovery() {
  double worst = 0.0, worst_identity = 0.0;
  for (std::size_t s : {4, 7, 12}) {
    const std::size_t n = 10 * s;
    std::vector<double> wave(s), y(n);
    double wave_mean = 0.0;
    for (std::size_t k = 0; k < s; ++k) wave_mean += (wave[k] = k < s / 2 ? 3.0 : -1.0);
    wave_mean /= static_cast<double>(s);
    for (std::size_t t = 0; t < n; ++t) y[t] = 5.0 + 0.25 * static_cast<double>(t) + wave[t % s];
    const auto r = decompose_additive(y, s);
    for (std::size_t t = 0; t < n; ++t) {
      worst = std::max(worst, std::abs(r.seasonal[t] - (wave[t % s] - wave_mean)));
      if (std::isnan(r.trend[t])) continue;
      worst = std::max(worst, std::abs(r.trend[t] - (5.0 + 0.25 * static_cast<double>(t) + wave_mean)));
      worst = std::max(worst, std::abs(r.residual[t]));
      const double rebuilt = r.trend[t] + r.seasonal[t] + r.residual[t];
      worst_identity = std::max(worst_identity, std::abs(rebuilt - y[t]) / std::max(1.0, std::abs(y[t])));
    }
  }
  return {worst <= 1e-9 && worst_identity <= 1e-12,
          "max component error " + fmt(worst) + ", max relative identity gap " + fmt(worst_identity)};
}

// 10. Resampling conservation and spike detection.
Outcome resample_and_spikes() {
  Rng rng(1010);
  const std::int64_t start = 1'600'000'000 - 1'600'000'000 % 300;
  std::vector<RawTweet> tweets;
  std::unordered_map<std::string, double> scores;
  for (int i = 0; i < 100; ++i) {
    RawTweet t;
    t.id = "a" + std::to_string(i);
    t.timestamp = UtcTime{start + static_cast<std::int64_t>(rng.below(7200))};
    t.likes = static_cast<std::int64_t>(rng.below(30));
    tweets.push_back(t);
    scores[t.id] = rng.uniform(-1.0, 1.0);
  }
  const auto series = resample(tweets, scores);
  std::size_t total = 0;
  double worst = 0.0;
  bool recount_ok = true;
  for (const auto& b : series.buckets) {
    total += b.tweet_count;
    std::size_t brute = 0;
    double likes = 0.0;
    for (const auto& t : tweets)
      if (t.timestamp.seconds >= b.bucket_start.seconds && t.timestamp.seconds < b.bucket_start.seconds + 300) {
        ++brute;
        likes += static_cast<double>(t.likes);
      }
    recount_ok = recount_ok && brute == b.tweet_count && likes == b.likes.sum;
    for (const auto* st : {&b.likes, &b.retweets, &b.sentiment})
      worst = std::max(worst, std::abs(st->mean * static_cast<double>(b.tweet_count) - st->sum) /
                                  std::max(1.0, std::abs(st->sum)));
  }

  // Poisson baseline with one bucket at 100 times the usual volume.
  std::vector<RawTweet> stream;
  std::unordered_map<std::string, double> zero;
  const std::size_t spike = 31;
  for (std::size_t b = 0; b < 60; ++b) {
    std::size_t n = rng.poisson(10.0);
    if (b == spike) n = 1000;
    if (b == 0 || b == 59) n = std::max<std::size_t>(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      RawTweet t;
      t.id = std::to_string(b) + "-" + std::to_string(i);
      t.timestamp = UtcTime{start + static_cast<std::int64_t>(b * 300 + rng.below(300))};
      stream.push_back(t);
      zero[t.id] = 0.0;
    }
  }
  const auto flags = detect_spikes(resample(stream, zero), 5.0);
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i].flagged) flagged.push_back(i);
  const bool only_spike = flagged == std::vector<std::size_t>{spike};
  return {total == 100 && recount_ok && worst <= 1e-12 && only_spike,
          "counts sum to " + std::to_string(total) + ", brute-force recount " + (recount_ok ? "matches" : "DIFFERS") +
              ", max |mean*count - sum| " + fmt(worst) + ", flagged " + std::to_string(flagged.size()) +
              " bucket(s)" + (only_spike ? " = the planted spike" : "")};
}

// 11. End-to-end run on a synthetic stream with planted structure.
Outcome end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t observed = 600, horizon = 12, spike = 300;
  const auto s = synthetic_stream(1111, observed + horizon, spike);

  const fs::path dir = fs::temp_directory_path() / ("tweetcast-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream t(dir / "tweets.jsonl");
    for (const auto& line : s.jsonl) t << line << '\n';
    std::ofstream l(dir / "lexicon.csv");
    l << "term,polarity\n";
    for (const auto& [w, p] : s.lexicon) l << w << ',' << p << '\n';
  }
  // Price driven by the cleaned features plus SARMA(1,0)(1,0)_24 noise.
  const double sigma = 0.05;
  Rng rng(1112);
  const auto noise = simulate_arma(rng, observed + horizon, [] {
    std::vector<double> ar(25, 0.0);
    ar[0] = 0.5;
    ar[23] = 0.3;
    ar[24] = -0.15;
    return ar;
  }(), {}, sigma);
  {
    std::ofstream p(dir / "prices.csv");
    p << "time,price\n";
    for (std::size_t t = 0; t < observed + horizon; ++t) {
      p << format_iso8601(UtcTime{s.start + static_cast<std::int64_t>(t) * s.interval}) << ',';
      if (t < observed) p.precision(17), p << 10.0 + 0.5 * s.sentiment_per_tweet[t] + 0.01 * s.count[t] + noise[t];
      p << '\n';
    }
  }

  pipeline::Config c;
  c.output_dir = (dir / "out").string();
  c.tweets = (dir / "tweets.jsonl").string();
  c.prices = (dir / "prices.csv").string();
  c.lexicon = (dir / "lexicon.csv").string();
  c.order = OrderSpec{1, 0, 0, 1, 0, 0, 24};
  c.horizon = horizon;
  std::vector<std::string> problems;
  try {
    pipeline::Workspace ws(c);
    pipeline::run_all(ws, c);
  } catch (const std::exception& e) {
    fs::remove_all(dir);
    return {false, std::string("pipeline threw: ") + e.what()};
  }
  auto slurp = [&](const char* name) { return pipeline::read_file((dir / "out" / name).string()); };

  std::vector<std::string> header;

  // Spike: exactly the planted bucket is removed.
  const auto removed = pipeline::detail::read_csv(slurp("removed_buckets.csv"), &header);
  const auto spike_time = format_iso8601(UtcTime{s.start + static_cast<std::int64_t>(spike) * s.interval});
  const bool spike_ok = removed.size() == 1 && removed[0].at(0) == spike_time;
  if (!spike_ok) problems.push_back("removed " + std::to_string(removed.size()) + " bucket(s)");

  // Cleaned features equal the independently computed ones.
  const auto features = pipeline::detail::read_time_table(slurp("features_clean.csv"), "features");
  double feat_gap = 0.0;
  for (std::size_t t = 0; t < s.count.size(); ++t) {
    feat_gap = std::max(feat_gap, std::abs(features.values.column("tweet_count").at(t) - s.count[t]));
    feat_gap = std::max(feat_gap, std::abs(features.values.column("sentiment_per_tweet").at(t) - s.sentiment_per_tweet[t]));
  }
  if (feat_gap > 1e-9) problems.push_back("feature gap " + fmt(feat_gap));

  // Topics: K = 3 chosen and planted word distributions recovered.
  const auto model = lda_model_from_json(nlohmann::json::parse(slurp("lda_model.json")));
  std::istringstream vin(slurp("vocabulary.csv"));
  const auto vocab = read_vocabulary_csv(vin);
  std::vector<std::vector<double>> truth(s.phi.size(), std::vector<double>(vocab.size(), 0.0));
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    const auto it = std::find(s.words.begin(), s.words.end(), vocab.term(v));
    if (it == s.words.end()) continue;
    const auto w = static_cast<std::size_t>(it - s.words.begin());
    for (std::size_t k = 0; k < s.phi.size(); ++k) truth[k][v] = s.phi[k][w];
  }
  double tv = 1.0;
  if (model.n_topics() == 3) tv = best_permutation_tv(model.phi, truth);
  else problems.push_back("selected K = " + std::to_string(model.n_topics()));
  if (!(tv < 0.1)) problems.push_back("topic TV " + fmt(tv));

  // Forecast quality on the held-out segment.
  const auto eval = nlohmann::json::parse(slurp("evaluation.json"));
  const double rmse_test = eval.at("rmse_test").get<double>();
  if (!(rmse_test <= 1.2 * sigma)) problems.push_back("test RMSE " + fmt(rmse_test));
  const auto forecast_rows = pipeline::detail::read_csv(slurp("forecast.csv"), &header);
  if (forecast_rows.size() != horizon) problems.push_back("forecast rows " + std::to_string(forecast_rows.size()));

  fs::remove_all(dir);
  const double secs = elapsed(t0);
  if (secs >= 300.0) problems.push_back("took " + fmt(secs) + " s");
  std::string msg = "spike " + std::string(spike_ok ? "found" : "MISSED") + ", K = " + std::to_string(model.n_topics()) +
                    ", topic TV " + fmt(tv) + ", test RMSE " + fmt(rmse_test) + " (noise sd " + fmt(sigma) + "), " +
                    fmt(secs) + " s";
  for (const auto& p : problems) msg += "; " + p;
  return {problems.empty(), msg};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"likelihood matches dense Gaussian density", likelihood_oracle},
      {"ARMA parameter recovery and AIC order selection", parameter_recovery},
      {"exogenous coefficient recovery", exog_recovery},
      {"differencing round trip", differencing_round_trip},
      {"AIC bookkeeping and RMSE", aic_and_rmse},
      {"planted topic recovery and topic-count selection", topic_recovery},
      {"sampler invariants, normalisation, determinism", lda_invariants},
      {"t-SNE gradient, descent, separation", tsne_checks},
      {"additive decomposition recovery", decomposition_recovery},
      {"resampling conservation and spike detection", resample_and_spikes},
      {"end-to-end synthetic run", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed ? 1 : 0;
}
