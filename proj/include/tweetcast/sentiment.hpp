#pragma once

// Lexicon polarity scorer: mean of matched term polarities with a short
// preceding-negator window that flips the sign.

#include <fstream>
#include <istream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tweetcast/common.hpp"

namespace tweetcast {

struct Lexicon {
  std::unordered_map<std::string, double> entries;
  std::unordered_set<std::string> negators;
  std::size_t negation_window = 1;
  /// Number of duplicate terms overwritten while loading.
  std::size_t duplicate_warnings = 0;
};

struct SentimentScore {
  std::string tweet_id;
  double polarity = 0.0;
  std::size_t matched_terms = 0;
};

/// {not, no, never, n't} plus the apostrophe-free spellings that the
/// tokenizer produces for common contractions.
inline std::unordered_set<std::string> default_negators() {
  return {"not",   "no",    "never", "n't",    "dont",  "cant",   "wont",     "isnt",     "doesnt",
          "didnt", "arent", "wasnt", "werent", "aint",  "couldnt", "shouldnt", "wouldnt", "havent"};
}

/// CSV `term,polarity` rows (an optional `term,polarity` header is skipped).
/// A line `[negators]` switches to a one-term-per-line negator list, which
/// replaces the defaults.
inline Lexicon load_lexicon(std::istream& in) {
  if (!in) throw DataError("lexicon", "lexicon source is not readable");
  Lexicon lex;
  std::unordered_set<std::string> negators;
  bool in_negators = false, saw_negators = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t == "[negators]") {
      in_negators = saw_negators = true;
      continue;
    }
    if (in_negators) {
      negators.insert(t);
      continue;
    }
    auto fields = csv_split(t);
    if (fields.size() != 2) throw DataError("lexicon", "line " + std::to_string(lineno) + ": expected term,polarity");
    const auto term = trim(fields[0]);
    if (lineno == 1 && term == "term") continue;
    double polarity = 0.0;
    try {
      std::size_t used = 0;
      polarity = std::stod(fields[1], &used);
      if (trim(fields[1].substr(used)) != "") throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw DataError("lexicon", "line " + std::to_string(lineno) + ": polarity is not a number");
    }
    if (!(polarity >= -1.0 && polarity <= 1.0))
      throw DataError("lexicon", "line " + std::to_string(lineno) + ": polarity " + fields[1] + " outside [-1, 1]");
    auto [it, inserted] = lex.entries.insert_or_assign(term, polarity);
    if (!inserted) ++lex.duplicate_warnings;
  }
  if (lex.entries.empty()) throw DataError("lexicon", "lexicon has no entries");
  lex.negators = saw_negators ? std::move(negators) : default_negators();
  for (const auto& n : lex.negators)
    if (lex.entries.count(n)) throw DataError("lexicon", "term '" + n + "' is both a negator and scored");
  return lex;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("lexicon", "cannot open lexicon: " + path);
  return load_lexicon(in);
}

/// Expects unstemmed tokens.
inline SentimentScore score(const std::vector<std::string>& tokens, const Lexicon& lexicon,
                            std::string tweet_id = {}) {
  SentimentScore out{std::move(tweet_id), 0.0, 0};
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.entries.find(tokens[i]);
    if (it == lexicon.entries.end()) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= lexicon.negation_window && back <= i; ++back)
      negated = negated || lexicon.negators.count(tokens[i - back]) > 0;
    total += negated ? -it->second : it->second;
    ++out.matched_terms;
  }
  if (out.matched_terms > 0) out.polarity = total / static_cast<double>(out.matched_terms);
  return out;
}

}  // namespace tweetcast
