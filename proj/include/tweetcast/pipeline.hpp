#pragma once

// Stage orchestration behind the command-line tool. Every stage reads its
// inputs from the output directory (or the configured source files), writes
// its outputs atomically and records hashes in manifest.json.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "tweetcast/common.hpp"
#include "tweetcast/corpus.hpp"
#include "tweetcast/decompose.hpp"
#include "tweetcast/embed.hpp"
#include "tweetcast/report.hpp"
#include "tweetcast/sarimax/diagnostics.hpp"
#include "tweetcast/sarimax/model.hpp"
#include "tweetcast/sentiment.hpp"
#include "tweetcast/timegrid.hpp"
#include "tweetcast/topics.hpp"

#ifndef TWEETCAST_DATA_DIR
#define TWEETCAST_DATA_DIR "data"
#endif

namespace tweetcast::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct Config {
  std::uint64_t seed = 20;
  std::string output_dir = "tweetcast-out";
  std::string tweets;
  std::string prices;
  std::string lexicon = std::string(TWEETCAST_DATA_DIR) + "/lexicon_en.csv";
  std::string stopwords;  // empty: built-in list
  std::optional<std::string> exclude_query = std::string("Climate Change");
  FieldMapping fields;

  std::int64_t interval_seconds = 300;
  bool stem = true;
  std::uint64_t min_occurrence = 10;
  std::size_t max_features = 5000;
  bool per_tweet_documents = false;

  double spike_threshold = 5.0;
  std::size_t event_top_terms = 20;

  std::optional<std::size_t> n_topics;  // unset: choose by held-out perplexity
  std::size_t k_min = 3, k_max = 8;
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t lda_iterations = 1000, lda_burn_in = 800;
  bool check_invariants = false;
  std::size_t top_words = 10;

  double perplexity = 30.0;
  std::size_t tsne_iterations = 1000;
  double learning_rate = 200.0;
  bool hellinger = false;
  std::size_t tsne_max_points = 2500;

  std::size_t bucket_period = 288, price_period = 5;

  std::optional<sarimax::OrderSpec> order;  // unset: grid search
  sarimax::GridRanges grid{2, 2, 2, 2, 0, 0, 24};
  std::string endog;  // empty: first value column of the price file
  std::vector<std::string> exog = {"sentiment_per_tweet", "tweet_count"};
  std::size_t horizon = 12;
  double split_ratio = 0.7;
  std::size_t restarts = 3;
  std::size_t max_evaluations = 2000;

  std::size_t histogram_bins = 20;

  LdaConfig lda() const {
    LdaConfig c;
    c.n_topics = n_topics.value_or(k_min);
    c.alpha = alpha;
    c.beta = beta;
    c.iterations = lda_iterations;
    c.burn_in = lda_burn_in;
    c.seed = seed;
    c.check_invariants = check_invariants;
    return c;
  }

  TsneConfig tsne() const {
    TsneConfig c;
    c.perplexity = perplexity;
    c.iterations = tsne_iterations;
    c.learning_rate = learning_rate;
    c.seed = seed;
    return c;
  }

  sarimax::FitOptions fit_options() const {
    sarimax::FitOptions o;
    o.seed = seed;
    o.restarts = restarts;
    o.optimizer.max_evaluations = max_evaluations;
    return o;
  }

  void validate() const {
    if (interval_seconds <= 0 || 3600 % interval_seconds != 0)
      throw ConfigError("interval_seconds must divide one hour evenly");
    if (max_features == 0) throw ConfigError("max_features must be positive");
    if (!(spike_threshold > 0.0)) throw ConfigError("spike threshold must be positive");
    if (n_topics && *n_topics == 0) throw ConfigError("n_topics must be at least 1");
    if (!n_topics && (k_min < 1 || k_min > k_max)) throw ConfigError("topic range must satisfy 1 <= k_min <= k_max");
    lda().validate();
    if (!(perplexity > 0.0)) throw ConfigError("perplexity must be positive");
    if (bucket_period < 2 || price_period < 2) throw ConfigError("decomposition periods must be at least 2");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must lie in (0, 1)");
    if (order && order->s < 1) throw ConfigError("seasonal period must be at least 1");
    if (order && (order->P || order->D || order->Q) && order->s < 2)
      throw ConfigError("seasonal terms need a seasonal period of at least 2");
    if (histogram_bins == 0) throw ConfigError("histogram_bins must be positive");
  }
};

namespace detail {

inline sarimax::OrderSpec order_from_json(const json& j) {
  sarimax::OrderSpec o;
  o.p = j.value("p", std::size_t{0});
  o.d = j.value("d", std::size_t{0});
  o.q = j.value("q", std::size_t{0});
  o.P = j.value("P", std::size_t{0});
  o.D = j.value("D", std::size_t{0});
  o.Q = j.value("Q", std::size_t{0});
  o.s = j.value("s", std::size_t{1});
  return o;
}

template <class T>
void read_key(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

template <class T>
void read_key(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end()) {
    if (it->is_null()) out.reset();
    else out = it->get<T>();
  }
}

}  // namespace detail

/// Overlays a JSON config document on `base`. Unknown keys are rejected so
/// that typos do not silently fall back to defaults.
inline Config apply_json(Config c, const json& j) {
  static const std::set<std::string> known = {
      "seed", "output_dir", "inputs", "exclude_query", "fields", "interval_seconds", "stem", "vectorizer",
      "events", "lda", "tsne", "decompose", "sarimax", "report"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config key: " + it.key());
  try {
    using detail::read_key;
    read_key(j, "seed", c.seed);
    read_key(j, "output_dir", c.output_dir);
    if (auto in = j.find("inputs"); in != j.end()) {
      read_key(*in, "tweets", c.tweets);
      read_key(*in, "prices", c.prices);
      read_key(*in, "lexicon", c.lexicon);
      read_key(*in, "stopwords", c.stopwords);
    }
    read_key(j, "exclude_query", c.exclude_query);
    if (auto f = j.find("fields"); f != j.end()) {
      read_key(*f, "id", c.fields.id);
      read_key(*f, "created_at", c.fields.created_at);
      read_key(*f, "text", c.fields.text);
      read_key(*f, "likes", c.fields.likes);
      read_key(*f, "retweets", c.fields.retweets);
      read_key(*f, "query", c.fields.query);
      read_key(*f, "lat", c.fields.lat);
      read_key(*f, "lon", c.fields.lon);
    }
    read_key(j, "interval_seconds", c.interval_seconds);
    read_key(j, "stem", c.stem);
    if (auto v = j.find("vectorizer"); v != j.end()) {
      read_key(*v, "min_occurrence", c.min_occurrence);
      read_key(*v, "max_features", c.max_features);
      if (auto d = v->find("documents"); d != v->end()) {
        const auto mode = d->get<std::string>();
        if (mode != "bucket" && mode != "tweet") throw ConfigError("vectorizer.documents must be 'bucket' or 'tweet'");
        c.per_tweet_documents = mode == "tweet";
      }
    }
    if (auto e = j.find("events"); e != j.end()) {
      read_key(*e, "threshold", c.spike_threshold);
      read_key(*e, "top_terms", c.event_top_terms);
    }
    if (auto l = j.find("lda"); l != j.end()) {
      read_key(*l, "n_topics", c.n_topics);
      read_key(*l, "k_min", c.k_min);
      read_key(*l, "k_max", c.k_max);
      read_key(*l, "alpha", c.alpha);
      read_key(*l, "beta", c.beta);
      read_key(*l, "iterations", c.lda_iterations);
      read_key(*l, "burn_in", c.lda_burn_in);
      read_key(*l, "check_invariants", c.check_invariants);
      read_key(*l, "top_words", c.top_words);
    }
    if (auto t = j.find("tsne"); t != j.end()) {
      read_key(*t, "perplexity", c.perplexity);
      read_key(*t, "iterations", c.tsne_iterations);
      read_key(*t, "learning_rate", c.learning_rate);
      read_key(*t, "hellinger", c.hellinger);
      read_key(*t, "max_points", c.tsne_max_points);
    }
    if (auto d = j.find("decompose"); d != j.end()) {
      read_key(*d, "bucket_period", c.bucket_period);
      read_key(*d, "price_period", c.price_period);
    }
    if (auto s = j.find("sarimax"); s != j.end()) {
      if (auto o = s->find("order"); o != s->end()) {
        if (o->is_null()) c.order.reset();
        else c.order = detail::order_from_json(*o);
      }
      if (auto g = s->find("grid"); g != s->end()) {
        read_key(*g, "p_max", c.grid.p_max);
        read_key(*g, "q_max", c.grid.q_max);
        read_key(*g, "P_max", c.grid.P_max);
        read_key(*g, "Q_max", c.grid.Q_max);
        read_key(*g, "d", c.grid.d);
        read_key(*g, "D", c.grid.D);
        read_key(*g, "s", c.grid.s);
      }
      read_key(*s, "endog", c.endog);
      read_key(*s, "exog", c.exog);
      read_key(*s, "horizon", c.horizon);
      read_key(*s, "split_ratio", c.split_ratio);
      read_key(*s, "restarts", c.restarts);
      read_key(*s, "max_evaluations", c.max_evaluations);
    }
    if (auto r = j.find("report"); r != j.end()) read_key(*r, "histogram_bins", c.histogram_bins);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  return c;
}

inline Config load_config(const std::string& path, Config base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
  return apply_json(std::move(base), j);
}

inline json to_json(const Config& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["inputs"] = {{"tweets", c.tweets}, {"prices", c.prices}, {"lexicon", c.lexicon}, {"stopwords", c.stopwords}};
  j["exclude_query"] = c.exclude_query ? json(*c.exclude_query) : json(nullptr);
  j["fields"] = {{"id", c.fields.id},       {"created_at", c.fields.created_at}, {"text", c.fields.text},
                 {"likes", c.fields.likes}, {"retweets", c.fields.retweets},     {"query", c.fields.query},
                 {"lat", c.fields.lat},     {"lon", c.fields.lon}};
  j["interval_seconds"] = c.interval_seconds;
  j["stem"] = c.stem;
  j["vectorizer"] = {{"min_occurrence", c.min_occurrence},
                     {"max_features", c.max_features},
                     {"documents", c.per_tweet_documents ? "tweet" : "bucket"}};
  j["events"] = {{"threshold", c.spike_threshold}, {"top_terms", c.event_top_terms}};
  j["lda"] = {{"n_topics", c.n_topics ? json(*c.n_topics) : json(nullptr)},
              {"k_min", c.k_min},
              {"k_max", c.k_max},
              {"alpha", c.alpha ? json(*c.alpha) : json(nullptr)},
              {"beta", c.beta},
              {"iterations", c.lda_iterations},
              {"burn_in", c.lda_burn_in},
              {"check_invariants", c.check_invariants},
              {"top_words", c.top_words}};
  j["tsne"] = {{"perplexity", c.perplexity},
               {"iterations", c.tsne_iterations},
               {"learning_rate", c.learning_rate},
               {"hellinger", c.hellinger},
               {"max_points", c.tsne_max_points}};
  j["decompose"] = {{"bucket_period", c.bucket_period}, {"price_period", c.price_period}};
  j["sarimax"] = {{"order", c.order ? sarimax::to_json(*c.order) : json(nullptr)},
                  {"grid",
                   {{"p_max", c.grid.p_max},
                    {"q_max", c.grid.q_max},
                    {"P_max", c.grid.P_max},
                    {"Q_max", c.grid.Q_max},
                    {"d", c.grid.d},
                    {"D", c.grid.D},
                    {"s", c.grid.s}}},
                  {"endog", c.endog},
                  {"exog", c.exog},
                  {"horizon", c.horizon},
                  {"split_ratio", c.split_ratio},
                  {"restarts", c.restarts},
                  {"max_evaluations", c.max_evaluations}};
  j["report"] = {{"histogram_bins", c.histogram_bins}};
  return j;
}

// ---------------------------------------------------------------------------
// Files, hashes, manifest
// ---------------------------------------------------------------------------

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("io", "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericError("hash", "SHA-256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

inline std::string sha256_file(const fs::path& p) { return sha256_hex(read_file(p)); }

/// Write to a temporary sibling, then rename over the target.
inline void write_atomic(const fs::path& target, std::string_view content) {
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("io", "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("io", "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("io", "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kLockDir = ".tweetcast.lock";

/// An output directory held under a directory lock for the lifetime of the
/// object. Stages register their inputs and outputs; `finish_stage` rewrites
/// the manifest.
class Workspace {
 public:
  Workspace(const Config& config) : root_(config.output_dir), config_(to_json(config)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw DataError("io", "cannot create output directory " + root_.string() + ": " + ec.message());
    if (!fs::create_directory(root_ / kLockDir, ec) || ec)
      throw DataError("output_locked", "output directory " + root_.string() + " is locked by another run (remove " +
                                           (root_ / kLockDir).string() + " if no run is active)");
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace() {
    std::error_code ec;
    fs::remove(root_ / kLockDir, ec);
  }

  const fs::path& root() const noexcept { return root_; }
  fs::path path(const std::string& name) const { return root_ / name; }
  bool has(const std::string& name) const { return fs::exists(path(name)); }

  void begin_stage(std::string name) {
    stage_ = std::move(name);
    inputs_ = json::object();
    outputs_ = json::object();
    started_ = std::chrono::steady_clock::now();
  }

  /// Reads a file produced by an upstream command; a missing file names the
  /// command that produces it.
  std::string input(const std::string& name, const std::string& producer) {
    const auto p = path(name);
    if (!fs::exists(p))
      throw DataError("missing_input", "stage '" + stage_ + "' needs " + name + "; run `tweetcast " + producer + "` first");
    auto content = read_file(p);
    inputs_[name] = sha256_hex(content);
    return content;
  }

  /// Reads an external source file.
  std::string source(const std::string& file, const std::string& what) {
    if (file.empty()) throw ConfigError("no " + what + " path configured");
    if (!fs::exists(file)) throw DataError("missing_input", what + " not found: " + file);
    auto content = read_file(file);
    inputs_[file] = sha256_hex(content);
    return content;
  }

  void write(const std::string& name, std::string_view content) {
    write_atomic(path(name), content);
    outputs_[name] = sha256_hex(content);
  }

  void finish_stage() {
    json manifest = json::object();
    if (fs::exists(path(kManifest))) {
      manifest = json::parse(read_file(path(kManifest)), nullptr, false);
      if (manifest.is_discarded() || !manifest.is_object()) manifest = json::object();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    manifest["config"] = config_;
    manifest["versions"] = {{"tweetcast", kVersion}, {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR)}};
    manifest["stages"][stage_] = {{"inputs", inputs_}, {"outputs", outputs_}, {"seconds", seconds}};
    json files = json::object();
    for (const auto& entry : fs::directory_iterator(root_)) {
      const auto name = entry.path().filename().string();
      if (!entry.is_regular_file() || name == kManifest || name.find(".tmp.") != std::string::npos) continue;
      files[name] = sha256_file(entry.path());
    }
    manifest["files"] = files;
    write_atomic(path(kManifest), manifest.dump(2) + "\n");
  }

 private:
  fs::path root_;
  json config_;
  std::string stage_;
  json inputs_, outputs_;
  std::chrono::steady_clock::time_point started_;
};

// ---------------------------------------------------------------------------
// Table helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& content, std::vector<std::string>* header) {
  std::istringstream in(content);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = csv_split(line);
    if (first && header) *header = fields;
    else rows.push_back(std::move(fields));
    first = false;
  }
  return rows;
}

inline double parse_number(const std::string& s, const std::string& where) {
  if (trim(s).empty()) return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (!trim(s.substr(used)).empty()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw DataError("parse", "not a number in " + where + ": '" + s + "'");
  }
}

inline std::string join_doubles(const std::vector<double>& xs, char sep = ';') {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += format_double(xs[i]);
  }
  return out;
}

inline std::vector<std::vector<std::string>> read_lines_as_tokens(const std::string& content) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    std::string w;
    while (words >> w) tokens.push_back(w);
    out.push_back(std::move(tokens));
  }
  return out;
}

/// Time-indexed table written by several stages: first column an ISO-8601
/// instant, the rest numeric.
struct TimeTable {
  std::vector<UtcTime> time;
  ColumnTable values;
};

inline TimeTable read_time_table(const std::string& content, const std::string& what) {
  std::vector<std::string> header;
  auto rows = read_csv(content, &header);
  if (header.size() < 2) throw DataError("parse", what + " needs a time column and at least one value column");
  TimeTable t;
  std::vector<std::vector<double>> cols(header.size() - 1);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw DataError("parse", what + " has a row with the wrong number of fields");
    auto ts = parse_iso8601(r[0]);
    if (!ts) throw DataError("parse", what + " has an unparseable time: " + r[0]);
    t.time.push_back(*ts);
    for (std::size_t c = 1; c < r.size(); ++c) cols[c - 1].push_back(parse_number(r[c], what));
  }
  for (std::size_t c = 1; c < header.size(); ++c) t.values.add(trim(header[c]), std::move(cols[c - 1]));
  return t;
}

inline std::string write_time_table(const std::vector<UtcTime>& time, const ColumnTable& values,
                                    const std::string& time_name = "bucket_start") {
  std::ostringstream out;
  out << time_name;
  for (const auto& n : values.names) out << ',' << csv_quote(n);
  out << '\n';
  for (std::size_t r = 0; r < time.size(); ++r) {
    out << format_iso8601(time[r]);
    for (const auto& col : values.columns) out << ',' << (std::isnan(col[r]) ? std::string() : format_double(col[r]));
    out << '\n';
  }
  return out.str();
}

inline DocTermMatrix read_dtm_csv(const std::string& content, std::size_t n_docs, std::size_t n_terms) {
  std::vector<std::string> header;
  std::vector<DtmEntry> entries;
  for (const auto& r : read_csv(content, &header)) {
    if (r.size() != 3) throw DataError("parse", "malformed document-term row");
    entries.push_back({std::stoull(r[0]), std::stoull(r[1]), static_cast<std::uint32_t>(std::stoul(r[2]))});
  }
  return DocTermMatrix(n_docs, n_terms, std::move(entries));
}

inline std::vector<RawTweet> read_tweets(const std::string& content) {
  std::istringstream in(content);
  auto res = ingest_tweets(in);
  if (res.skipped) throw DataError("parse", "normalised tweet file has malformed lines");
  return res.tweets;
}

inline StopwordSet stopwords_for(Workspace& ws, const Config& c) {
  if (c.stopwords.empty()) return default_stopwords();
  std::istringstream in(ws.source(c.stopwords, "stopword list"));
  return load_word_list(in);
}

/// Price file: time column, value columns; rows whose endogenous cell is
/// empty are future rows (they may still carry exogenous values).
struct PriceSeries {
  std::string endog_name;
  std::vector<UtcTime> time;  // observed then future
  std::vector<double> endog;  // observed only
  ColumnTable columns;        // every value column, all rows
  std::int64_t step = 0;
};

inline PriceSeries read_prices(const std::string& content, const std::string& endog_name) {
  auto t = read_time_table(content, "price file");
  PriceSeries p;
  p.time = t.time;
  p.columns = t.values;
  p.endog_name = endog_name.empty() ? t.values.names.front() : endog_name;
  const auto& y = p.columns.column(p.endog_name);
  std::size_t n_obs = 0;
  while (n_obs < y.size() && !std::isnan(y[n_obs])) ++n_obs;
  for (std::size_t i = n_obs; i < y.size(); ++i)
    if (!std::isnan(y[i])) throw DataError("missing_value", "price series has a gap before row " + std::to_string(i + 1));
  p.endog.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n_obs));
  if (p.time.size() < 2) throw insufficient_data("price series needs at least 2 rows");
  p.step = p.time[1].seconds - p.time[0].seconds;
  if (p.step <= 0) throw DataError("irregular_grid", "price times must be strictly increasing");
  for (std::size_t i = 1; i < p.time.size(); ++i)
    if (p.time[i].seconds - p.time[i - 1].seconds != p.step)
      throw DataError("irregular_grid", "price series is not on a regular grid at " + format_iso8601(p.time[i]));
  return p;
}

/// Exogenous columns on the price grid: price-file columns are used as is;
/// tweet features are averaged over the buckets starting in [t, t + step).
/// Cells with no source data are NaN.
inline ColumnTable align_exog(const PriceSeries& prices, const TimeTable& features, const std::vector<std::string>& names) {
  ColumnTable out;
  for (const auto& name : names) {
    if (name == prices.endog_name) throw ConfigError("exogenous column " + name + " is the response");
    if (std::find(prices.columns.names.begin(), prices.columns.names.end(), name) != prices.columns.names.end()) {
      out.add(name, prices.columns.column(name));
      continue;
    }
    const auto& f = features.values.column(name);
    std::vector<double> col(prices.time.size(), std::numeric_limits<double>::quiet_NaN());
    std::size_t j = 0;
    for (std::size_t i = 0; i < prices.time.size(); ++i) {
      const auto lo = prices.time[i].seconds, hi = lo + prices.step;
      while (j < features.time.size() && features.time[j].seconds < lo) ++j;
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t k = j; k < features.time.size() && features.time[k].seconds < hi; ++k) {
        sum += f[k];
        ++n;
      }
      if (n) col[i] = sum / static_cast<double>(n);
    }
    out.add(name, std::move(col));
  }
  return out;
}

inline ColumnTable slice_rows(const ColumnTable& t, std::size_t first, std::size_t last) {
  ColumnTable out;
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    out.add(t.names[c], std::vector<double>(t.columns[c].begin() + static_cast<std::ptrdiff_t>(first),
                                            t.columns[c].begin() + static_cast<std::ptrdiff_t>(last)));
  return out;
}

/// Observed-segment exog with every cell present.
inline ColumnTable observed_exog(const PriceSeries& prices, const ColumnTable& aligned) {
  auto exog = slice_rows(aligned, 0, prices.endog.size());
  for (std::size_t c = 0; c < exog.columns.size(); ++c)
    for (std::size_t i = 0; i < exog.columns[c].size(); ++i)
      if (std::isnan(exog.columns[c][i]))
        throw DataError("missing_exog", "exogenous column " + exog.names[c] + " has no data at " +
                                            format_iso8601(prices.time[i]) + " (no tweets in that price interval)");
  return exog;
}

struct PriceInputs {
  PriceSeries prices;
  ColumnTable aligned;  // all rows, observed and future
  ColumnTable exog;     // observed rows
};

inline PriceInputs price_inputs(Workspace& ws, const Config& c) {
  PriceInputs in;
  in.prices = read_prices(ws.source(c.prices, "price file"), c.endog);
  const bool needs_features = std::any_of(c.exog.begin(), c.exog.end(), [&](const std::string& n) {
    const auto& names = in.prices.columns.names;
    return std::find(names.begin(), names.end(), n) == names.end();
  });
  TimeTable features;
  if (needs_features) {
    features = read_time_table(ws.input("features_clean.csv", "events"), "features_clean.csv");
    if (in.prices.step % c.interval_seconds != 0)
      throw DataError("alignment", "price step (" + std::to_string(in.prices.step) +
                                       " s) is not a multiple of the bucket interval");
  }
  in.aligned = align_exog(in.prices, features, c.exog);
  in.exog = observed_exog(in.prices, in.aligned);
  return in;
}

inline sarimax::OrderSpec read_fitted_order(Workspace& ws) {
  auto j = json::parse(ws.input("sarimax_fit.json", "forecast"), nullptr, false);
  if (j.is_discarded()) throw DataError("parse", "sarimax_fit.json is not valid JSON");
  return order_from_json(j.at("order"));
}

inline std::string topic_series_csv(const TopicSeries& ts) {
  std::ostringstream out;
  out << "bucket_start,dominant_topic";
  for (std::size_t k = 0; k < ts.counts.size(); ++k) out << ",topic_" << k;
  out << '\n';
  for (std::size_t b = 0; b < ts.bucket_start.size(); ++b) {
    out << format_iso8601(ts.bucket_start[b]) << ',' << ts.dominant[b];
    for (const auto& c : ts.counts) out << ',' << c[b];
    out << '\n';
  }
  return out.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

/// Normalises the tweet source and drops the excluded query subset.
inline void cmd_ingest(Workspace& ws, const Config& c) {
  ws.begin_stage("ingest");
  std::istringstream in(ws.source(c.tweets, "tweet file"));
  auto res = ingest_tweets(in, c.fields);
  std::ostringstream out;
  std::size_t excluded = 0, kept = 0;
  for (const auto& t : res.tweets) {
    if (c.exclude_query && t.query_tag == *c.exclude_query) {
      ++excluded;
      continue;
    }
    out << to_json(t).dump() << '\n';
    ++kept;
  }
  ws.write("tweets.jsonl", out.str());
  ws.write("ingest_report.json", json{{"lines", res.lines},
                                      {"skipped_malformed", res.skipped},
                                      {"excluded_query", c.exclude_query ? json(*c.exclude_query) : json(nullptr)},
                                      {"excluded", excluded},
                                      {"kept", kept}}
                                         .dump(2) +
                                     "\n");
  ws.finish_stage();
}

/// Lexicon polarity per tweet, on unstemmed tokens with no stopword removal
/// so that negators survive.
inline void cmd_score(Workspace& ws, const Config& c) {
  ws.begin_stage("score");
  const auto tweets = detail::read_tweets(ws.input("tweets.jsonl", "ingest"));
  std::istringstream lex_in(ws.source(c.lexicon, "lexicon"));
  const auto lexicon = load_lexicon(lex_in);
  const StopwordSet none;
  std::ostringstream out;
  out << "tweet_id,polarity,matched_terms\n";
  for (const auto& t : tweets) {
    const auto s = score(preprocess(t.text, none, {.stem = false}), lexicon, t.id);
    out << csv_quote(s.tweet_id) << ',' << format_double(s.polarity) << ',' << s.matched_terms << '\n';
  }
  ws.write("scores.csv", out.str());
  ws.write("lexicon_report.json",
           json{{"entries", lexicon.entries.size()}, {"duplicate_warnings", lexicon.duplicate_warnings}}.dump(2) + "\n");
  ws.finish_stage();
}

inline void cmd_resample(Workspace& ws, const Config& c) {
  ws.begin_stage("resample");
  const auto tweets = detail::read_tweets(ws.input("tweets.jsonl", "ingest"));
  std::unordered_map<std::string, double> scores;
  {
    std::vector<std::string> header;
    for (const auto& r : detail::read_csv(ws.input("scores.csv", "score"), &header)) {
      if (r.size() != 3) throw DataError("parse", "malformed scores.csv row");
      scores[r[0]] = detail::parse_number(r[1], "scores.csv");
    }
  }
  const auto stopwords = detail::stopwords_for(ws, c);
  std::vector<std::vector<std::string>> bags;
  bags.reserve(tweets.size());
  std::ostringstream tweet_tokens;
  for (const auto& t : tweets) {
    bags.push_back(preprocess(t.text, stopwords, {.stem = c.stem}));
    for (std::size_t i = 0; i < bags.back().size(); ++i) tweet_tokens << (i ? " " : "") << bags.back()[i];
    tweet_tokens << '\n';
  }
  const auto series = resample(tweets, scores, c.interval_seconds, bags);
  std::ostringstream buckets, token_bags;
  write_buckets_csv(buckets, series);
  write_token_bags(token_bags, series);
  ws.write("buckets.csv", buckets.str());
  ws.write("token_bags.txt", token_bags.str());
  ws.write("tweet_tokens.txt", tweet_tokens.str());

  std::vector<UtcTime> starts;
  for (const auto& b : series.buckets) starts.push_back(b.bucket_start);
  const auto columns = bucket_columns(series);
  ws.write("features.csv", detail::write_time_table(starts, columns));
  if (series.size() >= 2) {
    const auto corr = correlation_matrix(columns);
    std::ostringstream out;
    out << "column";
    for (const auto& n : columns.names) out << ',' << n;
    out << '\n';
    for (std::size_t a = 0; a < corr.size(); ++a) {
      out << columns.names[a];
      for (double v : corr[a]) out << ',' << (std::isnan(v) ? std::string() : format_double(v));
      out << '\n';
    }
    ws.write("correlation.csv", out.str());
  }
  ws.finish_stage();
}

inline BucketSeries read_bucket_series(Workspace& ws, const Config& c, const std::string& csv, const std::string& bags,
                                       const std::string& producer) {
  std::istringstream table(ws.input(csv, producer));
  std::istringstream tokens(ws.input(bags, producer));
  return read_buckets(table, &tokens, c.interval_seconds);
}

/// Flags count spikes, removes them from the grid and reports their terms.
inline void cmd_events(Workspace& ws, const Config& c) {
  ws.begin_stage("events");
  const auto series = read_bucket_series(ws, c, "buckets.csv", "token_bags.txt", "resample");
  const auto flags = detect_spikes(series, c.spike_threshold);
  const auto removal = remove_outliers(series, flags);
  std::ostringstream ev, removed, terms, clean, clean_bags;
  write_event_flags_csv(ev, flags);
  removed << "bucket_start,tweet_count,robust_z\n";
  terms << "bucket_start,rank,term,count\n";
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (!flags[i].flagged) continue;
    removed << format_iso8601(flags[i].bucket_start) << ',' << series.buckets[i].tweet_count << ','
            << format_double(flags[i].robust_z) << '\n';
    const auto top = top_terms(series, i, i + 1, c.event_top_terms);
    for (std::size_t r = 0; r < top.size(); ++r)
      terms << format_iso8601(flags[i].bucket_start) << ',' << r + 1 << ',' << csv_quote(top[r].first) << ','
            << top[r].second << '\n';
  }
  write_buckets_csv(clean, removal.series);
  write_token_bags(clean_bags, removal.series);
  ws.write("events.csv", ev.str());
  ws.write("removed_buckets.csv", removed.str());
  ws.write("event_terms.csv", terms.str());
  ws.write("buckets_clean.csv", clean.str());
  ws.write("token_bags_clean.txt", clean_bags.str());
  std::vector<UtcTime> starts;
  for (const auto& b : removal.series.buckets) starts.push_back(b.bucket_start);
  ws.write("features_clean.csv", detail::write_time_table(starts, bucket_columns(removal.series)));
  ws.finish_stage();
}

inline void cmd_topics(Workspace& ws, const Config& c) {
  ws.begin_stage("topics");
  const auto series = read_bucket_series(ws, c, "buckets_clean.csv", "token_bags_clean.txt", "events");

  // Documents: cleaned bucket bags, or individual tweets outside removed buckets.
  std::vector<TokenizedDoc> docs;
  std::vector<std::size_t> doc_bucket;
  if (c.per_tweet_documents) {
    const auto tweets = detail::read_tweets(ws.input("tweets.jsonl", "ingest"));
    const auto tokens = detail::read_lines_as_tokens(ws.input("tweet_tokens.txt", "resample"));
    if (tokens.size() != tweets.size()) throw DataError("alignment", "tweet_tokens.txt does not match tweets.jsonl");
    std::set<std::int64_t> removed;
    {
      std::vector<std::string> header;
      for (const auto& r : detail::read_csv(ws.input("removed_buckets.csv", "events"), &header))
        if (auto t = parse_iso8601(r.at(0))) removed.insert(t->seconds);
    }
    const std::int64_t first = series.empty() ? 0 : series.buckets.front().bucket_start.seconds;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      const auto start = floor_to_interval(tweets[i].timestamp, c.interval_seconds).seconds;
      if (removed.count(start)) continue;
      docs.push_back({tweets[i].id, tokens[i]});
      doc_bucket.push_back(static_cast<std::size_t>((start - first) / c.interval_seconds));
    }
  } else {
    for (const auto& b : series.buckets) docs.push_back({format_iso8601(b.bucket_start), b.token_bag});
  }
  const auto vocab = build_vocabulary(docs, c.min_occurrence, c.max_features);
  const auto dtm = vectorize(docs, vocab);
  std::ostringstream vocab_csv, dtm_csv;
  write_vocabulary_csv(vocab_csv, vocab);
  write_dtm_csv(dtm_csv, dtm);
  ws.write("vocabulary.csv", vocab_csv.str());
  ws.write("dtm.csv", dtm_csv.str());

  auto lda_config = c.lda();
  if (!c.n_topics) {
    const auto sel = select_k(dtm, c.k_min, c.k_max, lda_config);
    std::ostringstream out;
    out << "k,perplexity,selected\n";
    for (const auto& [k, p] : sel.perplexity_by_k)
      out << k << ',' << format_double(p) << ',' << (k == sel.best_k ? "true" : "false") << '\n';
    ws.write("k_selection.csv", out.str());
    lda_config.n_topics = sel.best_k;
  }
  auto model = fit_lda(dtm, lda_config);
  model.vocabulary_hash = vocab.hash();
  ws.write("lda_model.json", to_json(model).dump() + "\n");

  std::ostringstream keywords;
  keywords << "topic,rank,term,probability\n";
  for (std::size_t k = 0; k < model.n_topics(); ++k) {
    const auto top = top_words(model, vocab, k, c.top_words);
    for (std::size_t r = 0; r < top.size(); ++r)
      keywords << k << ',' << r + 1 << ',' << csv_quote(top[r].first) << ',' << format_double(top[r].second) << '\n';
  }
  ws.write("topic_keywords.csv", keywords.str());

  TopicSeries ts;
  if (c.per_tweet_documents) {
    ts.counts.assign(model.n_topics(), std::vector<std::size_t>(series.size(), 0));
    for (std::size_t d = 0; d < docs.size(); ++d) ++ts.counts[argmax_lowest(model.theta[d])][doc_bucket[d]];
    for (std::size_t b = 0; b < series.size(); ++b) {
      ts.bucket_start.push_back(series.buckets[b].bucket_start);
      std::vector<double> col;
      for (const auto& row : ts.counts) col.push_back(static_cast<double>(row[b]));
      ts.dominant.push_back(argmax_lowest(col));
    }
  } else {
    ts = label_buckets(model, series);
  }
  ws.write("topic_series.csv", detail::topic_series_csv(ts));
  ws.finish_stage();
}

/// 2-D coordinates for topic centroids (phi rows) and documents (theta rows).
inline void cmd_embed(Workspace& ws, const Config& c) {
  ws.begin_stage("embed");
  auto j = json::parse(ws.input("lda_model.json", "topics"), nullptr, false);
  if (j.is_discarded()) throw DataError("parse", "lda_model.json is not valid JSON");
  const auto model = lda_model_from_json(j);
  const auto dtm = detail::read_dtm_csv(ws.input("dtm.csv", "topics"), model.n_docs(), model.n_terms());

  std::vector<double> share(model.n_topics(), 0.0);
  double total = 0.0;
  for (std::size_t d = 0; d < model.n_docs(); ++d) {
    const auto n = static_cast<double>(dtm.row_total(d));
    total += n;
    for (std::size_t k = 0; k < model.n_topics(); ++k) share[k] += n * model.theta[d][k];
  }
  for (auto& s : share) s = total > 0.0 ? s / total : 0.0;

  auto prep = [&](Points X) { return c.hellinger ? hellinger_transform(std::move(X)) : X; };
  const auto cfg = c.tsne();
  json params = {{"config", {{"perplexity", c.perplexity},
                             {"iterations", c.tsne_iterations},
                             {"learning_rate", c.learning_rate},
                             {"seed", c.seed},
                             {"hellinger", c.hellinger}}}};

  std::ostringstream topics_csv;
  topics_csv << "id,x,y,weight\n";
  if (model.n_topics() >= 3) {
    const Points X = prep(model.phi);
    auto P = pairwise_affinities(X, effective_perplexity(c.perplexity, X.size()));
    const auto emb = tsne(P, cfg);
    for (std::size_t k = 0; k < emb.Y.size(); ++k)
      topics_csv << "topic_" << k << ',' << format_double(emb.Y[k][0]) << ',' << format_double(emb.Y[k][1]) << ','
                 << format_double(share[k]) << '\n';
    params["topics"] = {{"perplexity_used", emb.perplexity_used},
                        {"learning_rate_used", emb.learning_rate_used},
                        {"kl_final", emb.kl_final},
                        {"unconverged_rows", P.unconverged}};
  } else {
    params["topics"] = {{"skipped", "fewer than 3 topics"}};
  }
  ws.write("embedding_topics.csv", topics_csv.str());

  std::vector<std::size_t> ids;
  for (std::size_t d = 0; d < model.n_docs(); ++d)
    if (dtm.row_total(d) > 0) ids.push_back(d);
  const std::size_t available = ids.size();
  if (ids.size() > c.tsne_max_points) {
    std::vector<std::size_t> thinned;
    for (std::size_t i = 0; i < c.tsne_max_points; ++i) thinned.push_back(ids[i * ids.size() / c.tsne_max_points]);
    ids = std::move(thinned);
  }
  std::ostringstream docs_csv;
  docs_csv << "id,x,y,weight\n";
  if (ids.size() >= 3) {
    Points X;
    for (auto d : ids) X.push_back(model.theta[d]);
    X = prep(std::move(X));
    auto P = pairwise_affinities(X, effective_perplexity(c.perplexity, X.size()));
    const auto emb = tsne(P, cfg);
    for (std::size_t i = 0; i < ids.size(); ++i)
      docs_csv << "doc_" << ids[i] << ',' << format_double(emb.Y[i][0]) << ',' << format_double(emb.Y[i][1]) << ','
               << dtm.row_total(ids[i]) << '\n';
    params["documents"] = {{"perplexity_used", emb.perplexity_used},
                           {"learning_rate_used", emb.learning_rate_used},
                           {"kl_final", emb.kl_final},
                           {"unconverged_rows", P.unconverged},
                           {"points", ids.size()},
                           {"available", available}};
  } else {
    params["documents"] = {{"skipped", "fewer than 3 non-empty documents"}};
  }
  ws.write("embedding_documents.csv", docs_csv.str());
  ws.write("embedding_params.json", params.dump(2) + "\n");
  ws.finish_stage();
}

inline void cmd_decompose(Workspace& ws, const Config& c) {
  ws.begin_stage("decompose");
  const auto features = detail::read_time_table(ws.input("features_clean.csv", "events"), "features_clean.csv");
  for (const char* name : {"tweet_count", "sentiment_per_tweet"}) {
    std::ostringstream out;
    write_decomposition_csv(out, decompose_additive(features.values.column(name), c.bucket_period));
    ws.write(std::string("decomposition_") + name + ".csv", out.str());
  }
  if (!c.prices.empty()) {
    const auto prices = detail::read_prices(ws.source(c.prices, "price file"), c.endog);
    std::ostringstream out;
    write_decomposition_csv(out, decompose_additive(prices.endog, c.price_period));
    ws.write("decomposition_price.csv", out.str());
  }
  ws.finish_stage();
}

/// Order selection (or the configured order), full-sample fit, residuals and
/// the multi-step forecast over the configured horizon.
inline void cmd_forecast(Workspace& ws, const Config& c) {
  ws.begin_stage("forecast");
  auto in = detail::price_inputs(ws, c);
  const auto& y = in.prices.endog;
  const auto opts = c.fit_options();

  sarimax::SarimaxFit fit;
  if (c.order) {
    fit = sarimax::fit(y, in.exog, *c.order, opts);
  } else {
    auto grid = sarimax::grid_search(y, in.exog, c.grid, opts);
    std::ostringstream table;
    table << "p,d,q,P,D,Q,s,ok,converged,loglik,aic,error\n";
    for (const auto& e : grid.table) {
      const auto& o = e.order;
      table << o.p << ',' << o.d << ',' << o.q << ',' << o.P << ',' << o.D << ',' << o.Q << ',' << o.s << ','
            << (e.ok ? "true" : "false") << ',' << (e.converged ? "true" : "false") << ','
            << (e.ok ? format_double(e.loglik) : "") << ',' << (e.ok ? format_double(e.aic) : "") << ','
            << csv_quote(e.error) << '\n';
    }
    ws.write("grid_table.csv", table.str());
    fit = std::move(grid.best);
  }
  ws.write("sarimax_fit.json", sarimax::to_json(fit).dump(2) + "\n");

  std::ostringstream res;
  res << "index,standardized_residual\n";
  for (std::size_t t = 0; t < fit.residuals.size(); ++t) res << t << ',' << format_double(fit.residuals[t]) << '\n';
  ws.write("residuals.csv", res.str());

  // Future rows: the price file's trailing rows without a response value.
  const std::size_t n = y.size();
  const std::size_t available = in.prices.time.size() - n;
  ColumnTable future;
  if (c.horizon > available && !c.exog.empty())
    throw DataError("missing_future_exog", "forecast horizon " + std::to_string(c.horizon) + " needs " +
                                               std::to_string(c.horizon) + " future rows in the price file, found " +
                                               std::to_string(available));
  if (!c.exog.empty()) {
    future = detail::slice_rows(in.aligned, n, n + c.horizon);
    for (std::size_t col = 0; col < future.columns.size(); ++col)
      for (std::size_t h = 0; h < c.horizon; ++h)
        if (std::isnan(future.columns[col][h]))
          throw DataError("missing_future_exog", "no future value of " + future.names[col] + " at " +
                                                     format_iso8601(in.prices.time[n + h]));
  }
  const auto fc = sarimax::forecast(fit, c.horizon, future);
  std::ostringstream out;
  out << "time,step,mean,variance,lo95,hi95\n";
  for (std::size_t h = 0; h < fc.horizon; ++h) {
    const UtcTime t{in.prices.time[n - 1].seconds + static_cast<std::int64_t>(h + 1) * in.prices.step};
    out << format_iso8601(t) << ',' << h + 1 << ',' << format_double(fc.mean[h]) << ','
        << format_double(fc.variance[h]) << ',' << format_double(fc.interval_95[h].first) << ','
        << format_double(fc.interval_95[h].second) << '\n';
  }
  ws.write("forecast.csv", out.str());

  if (y.size() >= 2 && !in.exog.columns.empty()) {
    ColumnTable joint;
    joint.add(in.prices.endog_name, y);
    for (std::size_t col = 0; col < in.exog.columns.size(); ++col) joint.add(in.exog.names[col], in.exog.columns[col]);
    const auto corr = correlation_matrix(joint);
    std::ostringstream cc;
    cc << "column";
    for (const auto& nm : joint.names) cc << ',' << csv_quote(nm);
    cc << '\n';
    for (std::size_t a = 0; a < corr.size(); ++a) {
      cc << csv_quote(joint.names[a]);
      for (double v : corr[a]) cc << ',' << (std::isnan(v) ? std::string() : format_double(v));
      cc << '\n';
    }
    ws.write("correlation_price.csv", cc.str());
  }
  ws.finish_stage();
}

/// 70/30 backtest with the order chosen by the forecast stage.
inline void cmd_evaluate(Workspace& ws, const Config& c) {
  ws.begin_stage("evaluate");
  const auto order = detail::read_fitted_order(ws);
  auto in = detail::price_inputs(ws, c);
  const auto rep = sarimax::evaluate(in.prices.endog, in.exog, order, c.split_ratio, c.fit_options());
  ws.write("evaluation.json", json{{"order", sarimax::to_json(order)},
                                   {"split_ratio", rep.split_ratio},
                                   {"split_index", rep.split_index},
                                   {"rmse_train", rep.rmse_train},
                                   {"rmse_test", rep.rmse_test},
                                   {"fit", sarimax::to_json(rep.fit)}}
                                      .dump(2) +
                                  "\n");
  std::ostringstream out;
  out << "time,observed,one_step,segment\n";
  for (std::size_t t = 0; t < in.prices.endog.size(); ++t)
    out << format_iso8601(in.prices.time[t]) << ',' << format_double(in.prices.endog[t]) << ','
        << (std::isnan(rep.predictions[t]) ? std::string() : format_double(rep.predictions[t])) << ','
        << (t < rep.split_index ? "train" : "test") << '\n';
  ws.write("predictions.csv", out.str());
  ws.finish_stage();
}

/// Renderer-agnostic tables for every figure type.
inline void cmd_report(Workspace& ws, const Config& c) {
  ws.begin_stage("report");
  const std::vector<std::pair<std::string, std::string>> required = {
      {"features_clean.csv", "events"}, {"topic_series.csv", "topics"},  {"residuals.csv", "forecast"},
      {"forecast.csv", "forecast"},     {"predictions.csv", "evaluate"}};
  std::vector<std::string> missing;
  for (const auto& [file, cmd] : required)
    if (!ws.has(file) && std::find(missing.begin(), missing.end(), cmd) == missing.end()) missing.push_back(cmd);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("missing_stage", "report needs the outputs of: " + list);
  }

  const auto features = detail::read_time_table(ws.input("features_clean.csv", "events"), "features_clean.csv");
  std::vector<std::string> header;
  const auto topic_rows = detail::read_csv(ws.input("topic_series.csv", "topics"), &header);
  const std::size_t K = header.size() - 2;
  ws.write("report_topic_counts.csv", ws.input("topic_series.csv", "topics"));

  // Per-topic groups of non-empty buckets by dominant topic.
  std::vector<std::vector<std::size_t>> groups(K);
  const auto& counts = features.values.column("tweet_count");
  for (std::size_t b = 0; b < topic_rows.size() && b < counts.size(); ++b)
    if (counts[b] > 0) groups[std::stoull(topic_rows[b][1])].push_back(b);

  std::vector<std::pair<std::string, std::vector<double>>> measures = {
      {"sentiment_per_tweet", features.values.column("sentiment_per_tweet")}, {"tweet_count", counts}};
  if (!c.prices.empty()) {
    const auto prices = detail::read_prices(ws.source(c.prices, "price file"), c.endog);
    std::vector<double> at_bucket(features.time.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < features.time.size(); ++b) {
      const auto offset = features.time[b].seconds - prices.time.front().seconds;
      if (offset < 0) continue;
      const auto row = static_cast<std::size_t>(offset / prices.step);
      if (row < prices.endog.size()) at_bucket[b] = prices.endog[row];
    }
    measures.emplace_back(prices.endog_name, std::move(at_bucket));
  }

  std::ostringstream box, skew, hist;
  box << "topic,measure,n,min,q1,median,q3,max,outliers\n";
  skew << "topic,measure,n,skewness\n";
  hist << "topic,measure,bin,left,right,density,mass\n";
  for (std::size_t k = 0; k < K; ++k)
    for (const auto& [name, values] : measures) {
      std::vector<double> xs;
      for (auto b : groups[k])
        if (!std::isnan(values[b])) xs.push_back(values[b]);
      if (xs.empty()) continue;
      const auto s = boxplot(xs);
      box << k << ',' << name << ',' << s.n << ',' << format_double(s.min) << ',' << format_double(s.q1) << ','
          << format_double(s.median) << ',' << format_double(s.q3) << ',' << format_double(s.max) << ','
          << detail::join_doubles(s.outliers) << '\n';
      if (xs.size() >= 3) skew << k << ',' << name << ',' << xs.size() << ',' << format_double(skewness(xs)) << '\n';
      const auto h = normalized_histogram(xs, c.histogram_bins);
      for (std::size_t i = 0; i < h.density.size(); ++i) {
        const double width = h.edges[i + 1] - h.edges[i];
        hist << k << ',' << name << ',' << i << ',' << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1])
             << ',' << format_double(h.density[i]) << ',' << format_double(h.density[i] * width) << '\n';
      }
    }
  ws.write("report_boxplots.csv", box.str());
  ws.write("report_skewness.csv", skew.str());
  ws.write("report_histograms.csv", hist.str());

  // Observed, one-step predictions, then forecast mean and interval.
  std::ostringstream pred;
  pred << "time,observed,one_step,segment,forecast,lo95,hi95\n";
  for (const auto& r : detail::read_csv(ws.input("predictions.csv", "evaluate"), &header))
    pred << r.at(0) << ',' << r.at(1) << ',' << r.at(2) << ',' << r.at(3) << ",,,\n";
  for (const auto& r : detail::read_csv(ws.input("forecast.csv", "forecast"), &header))
    pred << r.at(0) << ",,,forecast," << r.at(2) << ',' << r.at(4) << ',' << r.at(5) << '\n';
  ws.write("report_prediction.csv", pred.str());

  std::vector<double> residuals;
  for (const auto& r : detail::read_csv(ws.input("residuals.csv", "forecast"), &header))
    residuals.push_back(detail::parse_number(r.at(1), "residuals.csv"));
  const auto diag = sarimax::diagnose(residuals);
  std::ostringstream std_res, dh, qq, acf;
  std_res << "index,standardized_residual\n";
  for (std::size_t t = 0; t < diag.standardized.size(); ++t) std_res << t << ',' << format_double(diag.standardized[t]) << '\n';
  dh << "bin,left,right,density,normal_density\n";
  const boost::math::normal overlay(diag.normal_mean, diag.normal_sd);
  for (std::size_t i = 0; i < diag.histogram.density.size(); ++i) {
    const double mid = 0.5 * (diag.histogram.edges[i] + diag.histogram.edges[i + 1]);
    dh << i << ',' << format_double(diag.histogram.edges[i]) << ',' << format_double(diag.histogram.edges[i + 1]) << ','
       << format_double(diag.histogram.density[i]) << ',' << format_double(boost::math::pdf(overlay, mid)) << '\n';
  }
  qq << "theoretical,sample\n";
  for (const auto& [t, s] : diag.qq) qq << format_double(t) << ',' << format_double(s) << '\n';
  acf << "lag,acf,band_lo,band_hi\n";
  for (std::size_t k = 0; k < diag.acf.size(); ++k)
    acf << k << ',' << format_double(diag.acf[k]) << ',' << format_double(-diag.acf_band) << ','
        << format_double(diag.acf_band) << '\n';
  ws.write("report_residuals.csv", std_res.str());
  ws.write("report_residual_histogram.csv", dh.str());
  ws.write("report_qq.csv", qq.str());
  ws.write("report_acf.csv", acf.str());
  ws.write("report_ljung_box.json", json{{"lag", diag.ljung_box_lag},
                                         {"statistic", diag.ljung_box_stat},
                                         {"p_value", diag.ljung_box_pvalue}}
                                            .dump(2) +
                                        "\n");
  ws.finish_stage();
}

/// Every stage in order; the price stages run only when a price file is set.
inline void run_all(Workspace& ws, const Config& c) {
  cmd_ingest(ws, c);
  cmd_score(ws, c);
  cmd_resample(ws, c);
  cmd_events(ws, c);
  cmd_topics(ws, c);
  cmd_embed(ws, c);
  cmd_decompose(ws, c);
  if (c.prices.empty()) return;
  cmd_forecast(ws, c);
  cmd_evaluate(ws, c);
  cmd_report(ws, c);
}

}  // namespace tweetcast::pipeline
