#pragma once

// Porter (1980) suffix stripper. The suffix tables for steps 2-4 are plain
// data; the measure/cvc conditions follow the reference C implementation
// (including its "bli" and "logi" departures from the published rules).

#include <array>
#include <string>
#include <string_view>

namespace tweetcast {

namespace porter {

struct SuffixRule {
  std::string_view suffix;
  std::string_view replacement;
};

inline constexpr std::array<SuffixRule, 21> kStep2 = {{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    {"logi", "log"},
}};

inline constexpr std::array<SuffixRule, 7> kStep3 = {{
    {"icate", "ic"},
    {"ative", ""},
    {"alize", "al"},
    {"iciti", "ic"},
    {"ical", "ic"},
    {"ful", ""},
    {"ness", ""},
}};

// "ion" is handled separately: it needs a preceding 's' or 't'.
inline constexpr std::array<std::string_view, 18> kStep4 = {
    "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement",
    "ment", "ent", "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
};

class Stemmer {
 public:
  std::string operator()(std::string word) {
    if (word.size() <= 2) return word;
    b_ = std::move(word);
    step1ab();
    if (b_.size() > 1) {
      step1c();
      step_table(kStep2, 0);
      step_table(kStep3, 0);
      step4();
      step5();
    }
    return std::move(b_);
  }

 private:
  bool cons(std::size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0, end).
  int measure(std::size_t end) const {
    int n = 0;
    std::size_t i = 0;
    while (i < end && cons(i)) ++i;
    for (;;) {
      while (i < end && !cons(i)) ++i;
      if (i >= end) return n;
      while (i < end && cons(i)) ++i;
      ++n;
      if (i >= end) return n;
    }
  }

  bool vowel_in(std::size_t end) const {
    for (std::size_t i = 0; i < end; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool double_cons(std::size_t j) const {
    return j >= 1 && b_[j] == b_[j - 1] && cons(j);
  }

  // cvc at positions i-2, i-1, i with the final consonant not w, x or y.
  bool cvc(std::size_t i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char c = b_[i];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends(std::string_view s) const {
    return b_.size() >= s.size() && std::string_view(b_).substr(b_.size() - s.size()) == s;
  }

  void replace_suffix(std::size_t suffix_len, std::string_view with) {
    b_.resize(b_.size() - suffix_len);
    b_ += with;
  }

  void step1ab() {
    if (b_.back() == 's') {
      if (ends("sses")) replace_suffix(4, "ss");
      else if (ends("ies")) replace_suffix(3, "i");
      else if (!ends("ss")) b_.pop_back();
    }
    if (ends("eed")) {
      if (measure(b_.size() - 3) > 0) b_.pop_back();
      return;
    }
    std::size_t cut = 0;
    if (ends("ed")) cut = 2;
    else if (ends("ing")) cut = 3;
    if (cut == 0 || !vowel_in(b_.size() - cut)) return;
    b_.resize(b_.size() - cut);
    if (ends("at") || ends("bl") || ends("iz")) {
      b_ += 'e';
    } else if (double_cons(b_.size() - 1)) {
      const char c = b_.back();
      if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
    } else if (measure(b_.size()) == 1 && cvc(b_.size() - 1)) {
      b_ += 'e';
    }
  }

  void step1c() {
    if (b_.back() == 'y' && vowel_in(b_.size() - 1)) b_.back() = 'i';
  }

  template <std::size_t N>
  void step_table(const std::array<SuffixRule, N>& rules, int min_measure) {
    for (const auto& r : rules) {
      if (!ends(r.suffix)) continue;
      if (measure(b_.size() - r.suffix.size()) > min_measure) replace_suffix(r.suffix.size(), r.replacement);
      return;
    }
  }

  void step4() {
    for (auto s : kStep4) {
      if (!ends(s)) continue;
      if (measure(b_.size() - s.size()) > 1) b_.resize(b_.size() - s.size());
      return;
    }
    if (ends("ion") && b_.size() > 3) {
      const char c = b_[b_.size() - 4];
      if ((c == 's' || c == 't') && measure(b_.size() - 3) > 1) b_.resize(b_.size() - 3);
    }
  }

  void step5() {
    if (b_.back() == 'e') {
      const int m = measure(b_.size() - 1);
      if (m > 1 || (m == 1 && !cvc(b_.size() - 2))) b_.pop_back();
    }
    if (b_.size() > 1 && b_.back() == 'l' && double_cons(b_.size() - 1) && measure(b_.size()) > 1)
      b_.pop_back();
  }

  std::string b_;
};

}  // namespace porter

/// Porter-stems a lowercase ASCII word; other input is returned unchanged.
inline std::string stem(std::string word) {
  for (unsigned char c : word)
    if (c < 'a' || c > 'z') return word;
  return porter::Stemmer{}(std::move(word));
}

}  // namespace tweetcast
