// Command-line driver for the tweet analytics and forecasting pipeline.
//
// Exit codes: 0 success, 1 usage/configuration error, 2 data or validation
// error, 3 numeric or convergence failure.

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tweetcast/pipeline.hpp"

namespace {

using tweetcast::pipeline::Config;
using tweetcast::pipeline::Workspace;

/// Flag values that override the config file when given.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir, exclude_query, tweets, prices, lexicon, stopwords, order, endog;
  std::optional<std::int64_t> interval;
  std::optional<double> threshold, perplexity, split;
  std::optional<std::size_t> topics, k_min, k_max, lda_iterations, burn_in, tsne_iterations, bucket_period,
      price_period, horizon, bins;
  std::optional<std::vector<std::string>> exog;
  bool no_stem = false, per_tweet = false, check_invariants = false, hellinger = false, no_exclude = false;
};

tweetcast::sarimax::OrderSpec parse_order(const std::string& text) {
  std::vector<std::size_t> v;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const long x = std::stol(part, &used);
      if (used != part.size() || x < 0) throw std::invalid_argument(part);
      v.push_back(static_cast<std::size_t>(x));
    } catch (const std::exception&) {
      throw tweetcast::ConfigError("--order expects p,d,q,P,D,Q,s with nonnegative integers");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (v.size() != 3 && v.size() != 7) throw tweetcast::ConfigError("--order expects p,d,q or p,d,q,P,D,Q,s");
  tweetcast::sarimax::OrderSpec o{v[0], v[1], v[2]};
  if (v.size() == 7) {
    o.P = v[3];
    o.D = v[4];
    o.Q = v[5];
    o.s = v[6];
  }
  return o;
}

void apply(const Overrides& o, Config& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.exclude_query) c.exclude_query = *o.exclude_query;
  if (o.no_exclude) c.exclude_query.reset();
  if (o.tweets) c.tweets = *o.tweets;
  if (o.prices) c.prices = *o.prices;
  if (o.lexicon) c.lexicon = *o.lexicon;
  if (o.stopwords) c.stopwords = *o.stopwords;
  if (o.interval) c.interval_seconds = *o.interval;
  if (o.no_stem) c.stem = false;
  if (o.threshold) c.spike_threshold = *o.threshold;
  if (o.topics) c.n_topics = *o.topics;
  if (o.k_min) c.k_min = *o.k_min;
  if (o.k_max) c.k_max = *o.k_max;
  if (o.lda_iterations) c.lda_iterations = *o.lda_iterations;
  if (o.burn_in) c.lda_burn_in = *o.burn_in;
  if (o.per_tweet) c.per_tweet_documents = true;
  if (o.check_invariants) c.check_invariants = true;
  if (o.perplexity) c.perplexity = *o.perplexity;
  if (o.tsne_iterations) c.tsne_iterations = *o.tsne_iterations;
  if (o.hellinger) c.hellinger = true;
  if (o.bucket_period) c.bucket_period = *o.bucket_period;
  if (o.price_period) c.price_period = *o.price_period;
  if (o.order) c.order = parse_order(*o.order);
  if (o.endog) c.endog = *o.endog;
  if (o.exog) c.exog = *o.exog;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.split) c.split_ratio = *o.split;
  if (o.bins) c.histogram_bins = *o.bins;
}

int report_error(const std::string& name, const std::string& kind, int code, const std::string& message, bool as_json) {
  if (as_json) {
    std::cerr << nlohmann::json{{"error", name}, {"kind", kind}, {"exit_code", code}, {"message", message}}.dump()
              << '\n';
  } else {
    std::cerr << "tweetcast: " << kind << " error [" << name << "]: " << message << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tweet corpus analytics and SARIMAX price forecasting"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path;
  bool error_json = false;

  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--seed", o.seed, "Global random seed (default 20)");
  app.add_option("--output-dir", o.output_dir, "Directory for stage outputs and manifest.json");
  app.add_option("--exclude-query", o.exclude_query, "Drop tweets with this query tag (default \"Climate Change\")");
  app.add_flag("--no-exclude", o.no_exclude, "Keep every query tag");
  app.add_flag("--error-json", error_json, "Print errors as one JSON object on stderr");

  using Stage = std::function<void(Workspace&, const Config&)>;
  std::vector<std::pair<CLI::App*, Stage>> stages;
  auto stage = [&](const char* name, const char* help, Stage fn) {
    auto* sub = app.add_subcommand(name, help);
    stages.emplace_back(sub, std::move(fn));
    return sub;
  };
  namespace p = tweetcast::pipeline;

  auto* ingest = stage("ingest", "Parse and normalise the tweet file", p::cmd_ingest);
  ingest->add_option("--tweets", o.tweets, "Line-delimited JSON tweets");

  auto* score = stage("score", "Lexicon polarity per tweet", p::cmd_score);
  score->add_option("--lexicon", o.lexicon, "CSV term,polarity lexicon");

  auto* resample = stage("resample", "Aggregate tweets into fixed intervals", p::cmd_resample);
  resample->add_option("--interval", o.interval, "Bucket width in seconds (default 300)");
  resample->add_option("--stopwords", o.stopwords, "Stopword list, one word per line");
  resample->add_flag("--no-stem", o.no_stem, "Keep unstemmed tokens");

  auto* events = stage("events", "Flag and remove count spikes", p::cmd_events);
  events->add_option("--threshold", o.threshold, "Robust z threshold (default 5)");

  auto* topics = stage("topics", "Vocabulary, LDA fit and topic series", p::cmd_topics);
  topics->add_option("--topics", o.topics, "Fixed topic count (default: select by held-out perplexity)");
  topics->add_option("--k-min", o.k_min, "Smallest topic count tried (default 3)");
  topics->add_option("--k-max", o.k_max, "Largest topic count tried (default 8)");
  topics->add_option("--iterations", o.lda_iterations, "Gibbs sweeps (default 1000)");
  topics->add_option("--burn-in", o.burn_in, "Burn-in sweeps (default 800)");
  topics->add_flag("--per-tweet", o.per_tweet, "Use tweets rather than buckets as documents");
  topics->add_flag("--check-invariants", o.check_invariants, "Verify sampler counts after every sweep");

  auto* embed = stage("embed", "t-SNE coordinates for topics and documents", p::cmd_embed);
  embed->add_option("--perplexity", o.perplexity, "Target perplexity (default 30)");
  embed->add_option("--iterations", o.tsne_iterations, "Gradient steps (default 1000)");
  embed->add_flag("--hellinger", o.hellinger, "Square-root transform theta rows first");

  auto* decompose = stage("decompose", "Additive trend/seasonal/residual split", p::cmd_decompose);
  decompose->add_option("--bucket-period", o.bucket_period, "Period for bucket features (default 288)");
  decompose->add_option("--price-period", o.price_period, "Period for the price series (default 5)");
  decompose->add_option("--prices", o.prices, "Price CSV");

  auto* forecast = stage("forecast", "SARIMAX order selection, fit and forecast", p::cmd_forecast);
  forecast->add_option("--prices", o.prices, "Price CSV: time, response, optional regressors");
  forecast->add_option("--order", o.order, "Fixed order p,d,q[,P,D,Q,s] (default: AIC grid search)");
  forecast->add_option("--endog", o.endog, "Response column (default: first value column)");
  forecast->add_option("--exog", o.exog, "Regressor columns")->expected(0, -1);
  forecast->add_option("--horizon", o.horizon, "Forecast steps (default 12)");

  auto* evaluate = stage("evaluate", "Train/test split backtest", p::cmd_evaluate);
  evaluate->add_option("--prices", o.prices, "Price CSV");
  evaluate->add_option("--split", o.split, "Training fraction (default 0.7)");
  evaluate->add_option("--exog", o.exog, "Regressor columns")->expected(0, -1);

  auto* report = stage("report", "Plot-ready tables for every figure", p::cmd_report);
  report->add_option("--prices", o.prices, "Price CSV");
  report->add_option("--bins", o.bins, "Histogram bins (default 20)");

  auto* run = stage("run", "Every stage in order", p::run_all);
  run->add_option("--tweets", o.tweets, "Line-delimited JSON tweets");
  run->add_option("--prices", o.prices, "Price CSV");
  run->add_option("--lexicon", o.lexicon, "CSV term,polarity lexicon");
  run->add_option("--stopwords", o.stopwords, "Stopword list");
  run->add_option("--topics", o.topics, "Fixed topic count");
  run->add_option("--order", o.order, "Fixed order p,d,q[,P,D,Q,s]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", "usage", 1, e.what(), error_json);
  }

  try {
    Config config;
    if (!config_path.empty()) config = p::load_config(config_path, config);
    apply(o, config);
    config.validate();
    Workspace ws(config);
    for (auto& [sub, fn] : stages)
      if (sub->parsed()) fn(ws, config);
  } catch (const tweetcast::Error& e) {
    const char* kind = e.kind() == tweetcast::ErrorKind::usage ? "usage"
                       : e.kind() == tweetcast::ErrorKind::data ? "data"
                                                                : "numeric";
    return report_error(e.name(), kind, static_cast<int>(e.kind()), e.what(), error_json);
  } catch (const std::exception& e) {
    return report_error("internal", "data", 2, e.what(), error_json);
  }
  return 0;
}
