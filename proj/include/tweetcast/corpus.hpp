#pragma once

// Tweet ingestion, text normalisation, vocabulary construction and
// count vectorisation.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <tuple>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <nlohmann/json.hpp>

#include "tweetcast/common.hpp"
#include "tweetcast/stemmer.hpp"
#include "tweetcast/time.hpp"

namespace tweetcast {

struct RawTweet {
  std::string id;
  UtcTime timestamp;
  std::string text;
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::string query_tag;
};

/// JSON key names for each RawTweet field.
struct FieldMapping {
  std::string id = "id";
  std::string created_at = "created_at";
  std::string text = "text";
  std::string likes = "likes";
  std::string retweets = "retweets";
  std::string query = "query";
  std::string lat = "lat";
  std::string lon = "lon";
};

struct IngestResult {
  std::vector<RawTweet> tweets;
  std::size_t skipped = 0;
  std::size_t lines = 0;
};

namespace detail {

inline std::optional<std::int64_t> json_count(const nlohmann::json& v) {
  if (v.is_number_unsigned()) return static_cast<std::int64_t>(v.get<std::uint64_t>());
  if (v.is_number_integer()) {
    const auto x = v.get<std::int64_t>();
    if (x < 0) return std::nullopt;
    return x;
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x < 0 || x != std::floor(x) || !std::isfinite(x)) return std::nullopt;
    return static_cast<std::int64_t>(x);
  }
  return std::nullopt;
}

inline std::optional<double> json_coord(const nlohmann::json& obj, const std::string& key, double bound,
                                        bool& bad) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    bad = true;
    return std::nullopt;
  }
  const double x = it->get<double>();
  if (!std::isfinite(x) || x < -bound || x > bound) bad = true;
  return x;
}

inline std::optional<RawTweet> parse_tweet(const std::string& line, const FieldMapping& f) {
  auto obj = nlohmann::json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
  auto get_string = [&](const std::string& key) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
    return std::nullopt;
  };
  RawTweet t;
  auto id = get_string(f.id);
  auto created = get_string(f.created_at);
  auto text = get_string(f.text);
  auto query = get_string(f.query);
  if (!id || id->empty() || !created || !text || !query) return std::nullopt;
  auto ts = parse_iso8601(*created);
  if (!ts) return std::nullopt;
  auto likes_it = obj.find(f.likes);
  auto rts_it = obj.find(f.retweets);
  if (likes_it == obj.end() || rts_it == obj.end()) return std::nullopt;
  auto likes = json_count(*likes_it);
  auto rts = json_count(*rts_it);
  if (!likes || !rts) return std::nullopt;
  bool bad = false;
  t.latitude = json_coord(obj, f.lat, 90.0, bad);
  t.longitude = json_coord(obj, f.lon, 180.0, bad);
  if (bad) return std::nullopt;
  t.id = std::move(*id);
  t.timestamp = *ts;
  t.text = std::move(*text);
  t.likes = *likes;
  t.retweets = *rts;
  t.query_tag = std::move(*query);
  return t;
}

}  // namespace detail

/// Reads one JSON object per line. Blank lines are ignored; lines that fail to
/// parse or validate are counted in `skipped`. Throws a schema error when more
/// than half of the non-blank lines are malformed.
inline IngestResult ingest_tweets(std::istream& in, const FieldMapping& mapping = {}) {
  if (!in) throw DataError("ingest", "tweet source is not readable");
  IngestResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++result.lines;
    if (auto t = detail::parse_tweet(line, mapping)) result.tweets.push_back(std::move(*t));
    else ++result.skipped;
  }
  if (in.bad()) throw DataError("ingest", "read failure on tweet source");
  if (result.lines > 0 && 2 * result.skipped > result.lines) {
    throw DataError("schema", std::to_string(result.skipped) + " of " + std::to_string(result.lines) +
                                  " records are malformed; check the field mapping");
  }
  return result;
}

inline IngestResult ingest_tweets(const std::string& path, const FieldMapping& mapping = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("ingest", "cannot open tweet source: " + path);
  return ingest_tweets(in, mapping);
}

inline nlohmann::json to_json(const RawTweet& t) {
  nlohmann::json j = {{"id", t.id},
                      {"created_at", format_iso8601(t.timestamp)},
                      {"text", t.text},
                      {"likes", t.likes},
                      {"retweets", t.retweets},
                      {"query", t.query_tag}};
  if (t.latitude) j["lat"] = *t.latitude;
  if (t.longitude) j["lon"] = *t.longitude;
  return j;
}

// ---------------------------------------------------------------------------
// Text normalisation
// ---------------------------------------------------------------------------

using StopwordSet = std::unordered_set<std::string>;

struct TokenizedDoc {
  std::string tweet_id;
  std::vector<std::string> tokens;
};

struct PreprocessOptions {
  bool stem = true;
};

namespace detail {

inline std::string nfc_lower(const std::string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(text);
  if (U_SUCCESS(status)) {
    icu::UnicodeString n = nfc->normalize(u, status);
    if (U_SUCCESS(status)) u = n;
  }
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019 || c == 0x2018 || c == 0x02BC; }

}  // namespace detail

/// Number of Unicode code points in a UTF-8 string.
inline std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

/// lowercase, drop URLs and @mentions, drop '#', replace every non-letter with
/// a space (apostrophes are deleted so contractions stay one word), split,
/// drop stopwords and one-character tokens, then optionally Porter-stem.
inline std::vector<std::string> preprocess(const std::string& text, const StopwordSet& stopwords,
                                           PreprocessOptions options = {}) {
  static const std::regex url_re(R"((https?://|www\.)\S*)");
  static const std::regex mention_re(R"(@[^\s@]*)");
  std::string s = detail::nfc_lower(text);
  s = std::regex_replace(s, url_re, " ");
  s = std::regex_replace(s, mention_re, " ");

  icu::UnicodeString u = icu::UnicodeString::fromUTF8(s);
  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (detail::is_apostrophe(c)) continue;
    if (u_isalpha(c)) cleaned.append(c);
    else cleaned.append(static_cast<UChar32>(' '));
  }
  std::string flat;
  cleaned.toUTF8String(flat);

  std::vector<std::string> tokens;
  std::istringstream words(flat);
  std::string w;
  while (words >> w) {
    if (utf8_length(w) < 2 || stopwords.count(w)) continue;
    tokens.push_back(options.stem ? stem(std::move(w)) : std::move(w));
  }
  return tokens;
}

/// One word per line; '#' starts a comment.
inline StopwordSet load_word_list(std::istream& in) {
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto w = trim(line);
    if (!w.empty()) words.insert(detail::nfc_lower(w));
  }
  return words;
}

inline StopwordSet load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("word_list", "cannot open word list: " + path);
  return load_word_list(in);
}

/// A standard English stopword list (the classic SMART/NLTK core).
inline const StopwordSet& default_stopwords() {
  static const StopwordSet words = {
      "a",       "about",   "above",  "after",   "again",    "against", "all",     "am",
      "an",      "and",     "any",    "are",     "as",       "at",      "be",      "because",
      "been",    "before",  "being",  "below",   "between",  "both",    "but",     "by",
      "can",     "could",   "did",    "do",      "does",     "doing",   "down",    "during",
      "each",    "few",     "for",    "from",    "further",  "had",     "has",     "have",
      "having",  "he",      "her",    "here",    "hers",     "herself", "him",     "himself",
      "his",     "how",     "i",      "if",      "in",       "into",    "is",      "it",
      "its",     "itself",  "just",   "me",      "more",     "most",    "my",      "myself",
      "no",      "nor",     "not",    "now",     "of",       "off",     "on",      "once",
      "only",    "or",      "other",  "our",     "ours",     "ourselves", "out",   "over",
      "own",     "rt",      "same",   "she",     "should",   "so",      "some",    "such",
      "than",    "that",    "the",    "their",   "theirs",   "them",    "themselves", "then",
      "there",   "these",   "they",   "this",    "those",    "through", "to",      "too",
      "under",   "until",   "up",     "very",    "was",      "we",      "were",    "what",
      "when",    "where",   "which",  "while",   "who",      "whom",    "why",     "will",
      "with",    "would",   "you",    "your",    "yours",    "yourself", "yourselves", "amp",
      "dont",    "im",      "its",    "thats",   "theyre",   "youre",   "ive",     "cant",
  };
  return words;
}

// ---------------------------------------------------------------------------
// Vocabulary and document-term matrix
// ---------------------------------------------------------------------------

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Terms must be unique; order defines the column ids.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> frequencies)
      : terms_(std::move(terms)), frequency_(std::move(frequencies)) {
    if (terms_.size() != frequency_.size())
      throw DataError("vocabulary", "term and frequency lists differ in length");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!index_.emplace(terms_[i], i).second)
        throw DataError("vocabulary", "duplicate term: " + terms_[i]);
    }
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }
  const std::string& term(std::size_t id) const { return terms_.at(id); }
  std::uint64_t frequency(std::size_t id) const { return frequency_.at(id); }

  std::optional<std::size_t> index(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// FNV-1a over the term list; identifies the column layout a model was fit on.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& t : terms_) {
      for (unsigned char c : t) h = (h ^ c) * 0x100000001b3ULL;
      h = (h ^ 0xff) * 0x100000001b3ULL;
    }
    return h;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> frequency_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Keeps terms whose total corpus frequency is at least `min_occurrence`, then
/// the `max_features` most frequent (ties broken lexicographically). Terms are
/// ordered by descending frequency, then lexicographically.
inline Vocabulary build_vocabulary(const std::vector<TokenizedDoc>& docs, std::uint64_t min_occurrence = 10,
                                   std::size_t max_features = 5000) {
  if (docs.empty()) throw insufficient_data("cannot build a vocabulary from zero documents");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) ++counts[t];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [term, n] : counts)
    if (n >= min_occurrence) kept.emplace_back(term, n);
  if (kept.empty()) {
    throw DataError("empty_vocabulary", "no term occurs at least " + std::to_string(min_occurrence) +
                                            " times; the corpus is too small for these thresholds");
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (kept.size() > max_features) kept.resize(max_features);
  std::vector<std::string> terms;
  std::vector<std::uint64_t> freqs;
  for (auto& [t, n] : kept) {
    terms.push_back(t);
    freqs.push_back(n);
  }
  return Vocabulary(std::move(terms), std::move(freqs));
}

struct DtmEntry {
  std::size_t doc;
  std::size_t term;
  std::uint32_t count;

  friend bool operator==(const DtmEntry&, const DtmEntry&) = default;
};

/// Sparse counts, row-major: entries sorted by (doc, term), all counts > 0.
class DocTermMatrix {
 public:
  DocTermMatrix() = default;
  DocTermMatrix(std::size_t n_docs, std::size_t n_terms, std::vector<DtmEntry> entries)
      : n_docs_(n_docs), n_terms_(n_terms), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const DtmEntry& a, const DtmEntry& b) { return std::tie(a.doc, a.term) < std::tie(b.doc, b.term); });
    row_start_.assign(n_docs_ + 1, 0);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.doc >= n_docs_ || e.term >= n_terms_) throw DataError("dtm", "entry outside matrix bounds");
      if (e.count == 0) throw DataError("dtm", "zero count stored");
      if (i > 0 && entries_[i - 1].doc == e.doc && entries_[i - 1].term == e.term)
        throw DataError("dtm", "duplicate (doc, term) entry");
      ++row_start_[e.doc + 1];
    }
    for (std::size_t d = 0; d < n_docs_; ++d) row_start_[d + 1] += row_start_[d];
  }

  std::size_t n_docs() const noexcept { return n_docs_; }
  std::size_t n_terms() const noexcept { return n_terms_; }
  const std::vector<DtmEntry>& entries() const noexcept { return entries_; }

  std::span<const DtmEntry> row(std::size_t doc) const {
    return std::span<const DtmEntry>(entries_).subspan(row_start_[doc], row_start_[doc + 1] - row_start_[doc]);
  }

  std::uint64_t row_total(std::size_t doc) const {
    std::uint64_t n = 0;
    for (const auto& e : row(doc)) n += e.count;
    return n;
  }

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& e : entries_) n += e.count;
    return n;
  }

  /// New matrix holding the given rows, renumbered in order.
  DocTermMatrix select_rows(const std::vector<std::size_t>& docs) const {
    std::vector<DtmEntry> out;
    for (std::size_t i = 0; i < docs.size(); ++i)
      for (const auto& e : row(docs[i])) out.push_back({i, e.term, e.count});
    return DocTermMatrix(docs.size(), n_terms_, std::move(out));
  }

 private:
  std::size_t n_docs_ = 0;
  std::size_t n_terms_ = 0;
  std::vector<DtmEntry> entries_;
  std::vector<std::size_t> row_start_{0};
};

inline DocTermMatrix vectorize(const std::vector<TokenizedDoc>& docs, const Vocabulary& vocab) {
  if (vocab.empty()) throw DataError("empty_vocabulary", "cannot vectorize against an empty vocabulary");
  std::vector<DtmEntry> entries;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::map<std::size_t, std::uint32_t> row;
    for (const auto& t : docs[d].tokens)
      if (auto id = vocab.index(t)) ++row[*id];
    for (auto [term, n] : row) entries.push_back({d, term, n});
  }
  return DocTermMatrix(docs.size(), vocab.size(), std::move(entries));
}

inline void write_vocabulary_csv(std::ostream& out, const Vocabulary& vocab) {
  out << "term,frequency\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) out << csv_quote(vocab.term(i)) << ',' << vocab.frequency(i) << '\n';
}

inline Vocabulary read_vocabulary_csv(std::istream& in) {
  std::string line;
  std::getline(in, line);
  std::vector<std::string> terms;
  std::vector<std::uint64_t> freqs;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = csv_split(line);
    if (f.size() != 2) throw DataError("vocabulary", "malformed vocabulary row: " + line);
    terms.push_back(f[0]);
    freqs.push_back(std::stoull(f[1]));
  }
  return Vocabulary(std::move(terms), std::move(freqs));
}

inline void write_dtm_csv(std::ostream& out, const DocTermMatrix& dtm) {
  out << "doc,term_id,count\n";
  for (const auto& e : dtm.entries()) out << e.doc << ',' << e.term << ',' << e.count << '\n';
}

}  // namespace tweetcast
