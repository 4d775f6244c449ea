#pragma once

// Fixed-interval resampling of scored tweets, robust spike detection and the
// derived per-bucket feature table.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "tweetcast/common.hpp"
#include "tweetcast/corpus.hpp"
#include "tweetcast/time.hpp"

namespace tweetcast {

/// sum / mean / population std of one column within a bucket. std is 0 for
/// fewer than two values.
struct StatTriple {
  double sum = 0.0;
  double mean = 0.0;
  double std = 0.0;

  static StatTriple of(std::span<const double> xs) {
    StatTriple s;
    if (xs.empty()) return s;
    for (double x : xs) s.sum += x;
    s.mean = s.sum / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
      double ss = 0.0;
      for (double x : xs) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(xs.size()));
    }
    return s;
  }
};

struct IntervalBucket {
  UtcTime bucket_start;
  std::size_t tweet_count = 0;
  StatTriple likes, retweets, sentiment;
  std::vector<std::string> token_bag;
  std::optional<double> lat_mean, lat_std, lon_mean, lon_std;
};

struct BucketSeries {
  std::int64_t interval_seconds = 300;
  std::vector<IntervalBucket> buckets;

  std::size_t size() const noexcept { return buckets.size(); }
  bool empty() const noexcept { return buckets.empty(); }

  /// True when bucket starts step by exactly one interval.
  bool is_regular() const {
    for (std::size_t i = 1; i < buckets.size(); ++i)
      if (buckets[i].bucket_start.seconds - buckets[i - 1].bucket_start.seconds != interval_seconds) return false;
    return true;
  }
};

namespace detail {

inline void fill_bucket(IntervalBucket& b, const std::vector<const RawTweet*>& members,
                        const std::vector<double>& polarity, const std::vector<const std::vector<std::string>*>& bags) {
  b.tweet_count = members.size();
  std::vector<double> likes, rts, lat, lon;
  for (const RawTweet* t : members) {
    likes.push_back(static_cast<double>(t->likes));
    rts.push_back(static_cast<double>(t->retweets));
    if (t->latitude) lat.push_back(*t->latitude);
    if (t->longitude) lon.push_back(*t->longitude);
  }
  b.likes = StatTriple::of(likes);
  b.retweets = StatTriple::of(rts);
  b.sentiment = StatTriple::of(polarity);
  for (const auto* bag : bags)
    if (bag) b.token_bag.insert(b.token_bag.end(), bag->begin(), bag->end());
  if (!lat.empty()) {
    auto s = StatTriple::of(lat);
    b.lat_mean = s.mean;
    b.lat_std = s.std;
  }
  if (!lon.empty()) {
    auto s = StatTriple::of(lon);
    b.lon_mean = s.mean;
    b.lon_std = s.std;
  }
}

}  // namespace detail

/// Assigns each tweet to the left-closed interval containing its timestamp and
/// materialises every interval between the first and last tweet.
/// `token_bags`, when non-empty, is aligned with `tweets`.
inline BucketSeries resample(const std::vector<RawTweet>& tweets,
                             const std::unordered_map<std::string, double>& scores,
                             std::int64_t interval_seconds = 300,
                             std::span<const std::vector<std::string>> token_bags = {}) {
  if (interval_seconds <= 0 || 3600 % interval_seconds != 0)
    throw ConfigError("interval must divide one hour evenly, got " + std::to_string(interval_seconds) + " s");
  if (!token_bags.empty() && token_bags.size() != tweets.size())
    throw DataError("alignment", "token bags are not aligned with tweets");
  BucketSeries series;
  series.interval_seconds = interval_seconds;
  if (tweets.empty()) return series;

  std::map<std::int64_t, std::vector<std::size_t>> by_bucket;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    if (!scores.count(tweets[i].id)) throw DataError("missing_score", "no sentiment score for tweet " + tweets[i].id);
    by_bucket[floor_to_interval(tweets[i].timestamp, interval_seconds).seconds].push_back(i);
  }
  const std::int64_t first = by_bucket.begin()->first;
  const std::int64_t last = by_bucket.rbegin()->first;
  for (std::int64_t start = first; start <= last; start += interval_seconds) {
    IntervalBucket b;
    b.bucket_start = UtcTime{start};
    if (auto it = by_bucket.find(start); it != by_bucket.end()) {
      std::vector<const RawTweet*> members;
      std::vector<double> polarity;
      std::vector<const std::vector<std::string>*> bags;
      for (std::size_t i : it->second) {
        members.push_back(&tweets[i]);
        polarity.push_back(scores.at(tweets[i].id));
        bags.push_back(token_bags.empty() ? nullptr : &token_bags[i]);
      }
      detail::fill_bucket(b, members, polarity, bags);
    }
    series.buckets.push_back(std::move(b));
  }
  return series;
}

struct EventFlag {
  UtcTime bucket_start;
  double robust_z = 0.0;
  bool flagged = false;
};

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw insufficient_data("median of an empty sample");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Robust z-score of each bucket count: (count - median) / (1.4826 * MAD).
/// When MAD is zero, counts above the median get +inf.
inline std::vector<EventFlag> detect_spikes(const BucketSeries& series, double threshold = 5.0) {
  if (series.size() < 10)
    throw insufficient_data("spike detection needs at least 10 buckets, got " + std::to_string(series.size()));
  std::vector<double> counts;
  for (const auto& b : series.buckets) counts.push_back(static_cast<double>(b.tweet_count));
  const double med = median(counts);
  std::vector<double> dev;
  for (double c : counts) dev.push_back(std::abs(c - med));
  const double scale = 1.4826 * median(dev);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<EventFlag> flags;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double z = 0.0;
    if (scale > 0.0) z = (counts[i] - med) / scale;
    else if (counts[i] > med) z = inf;
    else if (counts[i] < med) z = -inf;
    flags.push_back({series.buckets[i].bucket_start, z, z > threshold});
  }
  return flags;
}

struct RemovedBucket {
  UtcTime bucket_start;
  std::size_t tweet_count = 0;
  double robust_z = 0.0;
};

struct OutlierRemoval {
  BucketSeries series;
  std::vector<RemovedBucket> removed;
};

/// Replaces flagged buckets with empty ones so the grid stays gap-free.
inline OutlierRemoval remove_outliers(const BucketSeries& series, const std::vector<EventFlag>& flags) {
  if (flags.size() != series.size()) throw DataError("alignment", "event flags do not align with the series");
  OutlierRemoval out{series, {}};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i].bucket_start != series.buckets[i].bucket_start)
      throw DataError("alignment", "event flag timestamps do not match the series");
    if (!flags[i].flagged) continue;
    auto& b = out.series.buckets[i];
    out.removed.push_back({b.bucket_start, b.tweet_count, flags[i].robust_z});
    b = IntervalBucket{};
    b.bucket_start = flags[i].bucket_start;
  }
  return out;
}

using TermCount = std::pair<std::string, std::uint64_t>;

/// Descending frequency, lexicographic tie-break.
inline std::vector<TermCount> rank_terms(const std::unordered_map<std::string, std::uint64_t>& counts, std::size_t n) {
  std::vector<TermCount> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const TermCount& a, const TermCount& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

/// Most frequent tokens over buckets [first, last).
inline std::vector<TermCount> top_terms(const BucketSeries& series, std::size_t first, std::size_t last, std::size_t n) {
  if (first > last || last > series.size()) throw DataError("range", "bucket range outside the series");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (std::size_t i = first; i < last; ++i)
    for (const auto& t : series.buckets[i].token_bag) ++counts[t];
  return rank_terms(counts, n);
}

/// tweet_count and sentiment_per_tweet (0 for empty buckets).
inline ColumnTable derive_features(const BucketSeries& series) {
  std::vector<double> count, spt;
  for (const auto& b : series.buckets) {
    count.push_back(static_cast<double>(b.tweet_count));
    spt.push_back(b.tweet_count == 0 ? 0.0 : b.sentiment.sum / static_cast<double>(b.tweet_count));
  }
  ColumnTable t;
  t.add("tweet_count", std::move(count));
  t.add("sentiment_per_tweet", std::move(spt));
  return t;
}

/// The full resampled column set, used for the correlation overview.
inline ColumnTable bucket_columns(const BucketSeries& series) {
  ColumnTable t;
  auto col = [&](auto get) {
    std::vector<double> v;
    for (const auto& b : series.buckets) v.push_back(get(b));
    return v;
  };
  t.add("tweet_count", col([](const IntervalBucket& b) { return static_cast<double>(b.tweet_count); }));
  t.add("likes_sum", col([](const IntervalBucket& b) { return b.likes.sum; }));
  t.add("retweets_sum", col([](const IntervalBucket& b) { return b.retweets.sum; }));
  t.add("sentiment_sum", col([](const IntervalBucket& b) { return b.sentiment.sum; }));
  t.add("sentiment_mean", col([](const IntervalBucket& b) { return b.sentiment.mean; }));
  t.add("sentiment_per_tweet", derive_features(series).column("sentiment_per_tweet"));
  return t;
}

/// Pearson correlations; entries involving a zero-variance column are NaN.
inline std::vector<std::vector<double>> correlation_matrix(const ColumnTable& table) {
  const std::size_t n = table.rows();
  if (n < 2) throw insufficient_data("correlation needs at least 2 rows");
  const std::size_t k = table.columns.size();
  std::vector<std::vector<double>> centered(k);
  std::vector<double> norm(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto& x = table.columns[c];
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) {
      centered[c].push_back(v - mean);
      ss += (v - mean) * (v - mean);
    }
    norm[c] = std::sqrt(ss);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> r(k, std::vector<double>(k, nan));
  for (std::size_t a = 0; a < k; ++a) {
    if (norm[a] == 0.0) continue;
    r[a][a] = 1.0;
    for (std::size_t b = a + 1; b < k; ++b) {
      if (norm[b] == 0.0) continue;
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += centered[a][i] * centered[b][i];
      r[a][b] = r[b][a] = std::clamp(s / (norm[a] * norm[b]), -1.0, 1.0);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Serialisation
// ---------------------------------------------------------------------------

inline constexpr const char* kBucketHeader =
    "bucket_start,tweet_count,likes_sum,likes_mean,likes_std,retweets_sum,retweets_mean,retweets_std,"
    "sentiment_sum,sentiment_mean,sentiment_std,lat_mean,lat_std,lon_mean,lon_std";

inline void write_buckets_csv(std::ostream& out, const BucketSeries& series) {
  out << kBucketHeader << '\n';
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  for (const auto& b : series.buckets) {
    out << format_iso8601(b.bucket_start) << ',' << b.tweet_count;
    for (const StatTriple* s : {&b.likes, &b.retweets, &b.sentiment})
      out << ',' << format_double(s->sum) << ',' << format_double(s->mean) << ',' << format_double(s->std);
    out << ',' << opt(b.lat_mean) << ',' << opt(b.lat_std) << ',' << opt(b.lon_mean) << ',' << opt(b.lon_std) << '\n';
  }
}

/// One line per bucket, space-separated tokens.
inline void write_token_bags(std::ostream& out, const BucketSeries& series) {
  for (const auto& b : series.buckets) {
    for (std::size_t i = 0; i < b.token_bag.size(); ++i) out << (i ? " " : "") << b.token_bag[i];
    out << '\n';
  }
}

inline BucketSeries read_buckets(std::istream& csv, std::istream* token_bags, std::int64_t interval_seconds) {
  BucketSeries series;
  series.interval_seconds = interval_seconds;
  std::string line;
  if (!std::getline(csv, line) || trim(line) != kBucketHeader)
    throw DataError("bucket_table", "bucket table header does not match the expected columns");
  auto num = [](const std::string& s) { return std::stod(s); };
  auto opt = [&](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return num(s);
  };
  while (std::getline(csv, line)) {
    if (trim(line).empty()) continue;
    auto f = csv_split(line);
    if (f.size() != 15) throw DataError("bucket_table", "malformed bucket row: " + line);
    IntervalBucket b;
    auto ts = parse_iso8601(f[0]);
    if (!ts) throw DataError("bucket_table", "bad timestamp: " + f[0]);
    b.bucket_start = *ts;
    b.tweet_count = std::stoull(f[1]);
    StatTriple* triples[] = {&b.likes, &b.retweets, &b.sentiment};
    for (int k = 0; k < 3; ++k) *triples[k] = {num(f[2 + 3 * k]), num(f[3 + 3 * k]), num(f[4 + 3 * k])};
    b.lat_mean = opt(f[11]);
    b.lat_std = opt(f[12]);
    b.lon_mean = opt(f[13]);
    b.lon_std = opt(f[14]);
    if (token_bags) {
      std::string bag;
      if (!std::getline(*token_bags, bag)) throw DataError("bucket_table", "token sidecar has fewer lines than buckets");
      std::istringstream words(bag);
      std::string w;
      while (words >> w) b.token_bag.push_back(w);
    }
    series.buckets.push_back(std::move(b));
  }
  if (!series.is_regular()) throw DataError("bucket_table", "bucket grid has gaps or an unexpected step");
  return series;
}

inline void write_event_flags_csv(std::ostream& out, const std::vector<EventFlag>& flags) {
  out << "bucket_start,robust_z,flagged\n";
  for (const auto& f : flags)
    out << format_iso8601(f.bucket_start) << ',' << format_double(f.robust_z) << ',' << (f.flagged ? "true" : "false")
        << '\n';
}

}  // namespace tweetcast
