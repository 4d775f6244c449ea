#include <algorithm>
#include <sstream>

#include <gtest/gtest.h>

#include "tweetcast/common.hpp"
#include "tweetcast/sentiment.hpp"

using namespace tweetcast;

namespace {

Lexicon parse(const std::string& text) {
  std::istringstream in(text);
  return load_lexicon(in);
}

}  // namespace

TEST(Lexicon, SingleEntry) {
  const auto lex = parse("good,0.7\n");
  EXPECT_EQ(lex.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(lex.entries.at("good"), 0.7);
}

TEST(Lexicon, OutOfRangeIsAnError) { EXPECT_THROW(parse("bad,-2.0\n"), DataError); }

TEST(Lexicon, LastDuplicateWinsWithOneWarning) {
  const auto lex = parse("term,polarity\ngood,0.5\ngood,0.7\n");
  EXPECT_DOUBLE_EQ(lex.entries.at("good"), 0.7);
  EXPECT_EQ(lex.duplicate_warnings, 1u);
}

TEST(Lexicon, EmptyOrMalformedIsAnError) {
  EXPECT_THROW(parse("term,polarity\n"), DataError);
  EXPECT_THROW(parse("good\n"), DataError);
  EXPECT_THROW(parse("good,lots\n"), DataError);
}

TEST(Lexicon, NegatorSectionReplacesDefaults) {
  const auto lex = parse("good,0.7\n[negators]\nnae\n");
  EXPECT_EQ(lex.negators, (std::unordered_set<std::string>{"nae"}));
  EXPECT_DOUBLE_EQ(score({"not", "good"}, lex).polarity, 0.7);
  EXPECT_DOUBLE_EQ(score({"nae", "good"}, lex).polarity, -0.7);
  EXPECT_THROW(parse("not,0.1\n"), DataError);
}

TEST(Lexicon, BundledFileLoads) {
  const auto lex = load_lexicon(std::string(TWEETCAST_DATA_DIR) + "/lexicon_en.csv");
  EXPECT_GT(lex.entries.size(), 50u);
  for (const auto& [t, p] : lex.entries) {
    EXPECT_GE(p, -1.0) << t;
    EXPECT_LE(p, 1.0) << t;
  }
}

TEST(Score, EmptyTokens) {
  const auto s = score({}, parse("good,0.7\n"));
  EXPECT_EQ(s.polarity, 0.0);
  EXPECT_EQ(s.matched_terms, 0u);
}

TEST(Score, MeanOfIdenticalValues) {
  EXPECT_DOUBLE_EQ(score({"good", "good"}, parse("good,0.7\n")).polarity, 0.7);
}

TEST(Score, NegatorFlipsTheNextTermOnly) {
  const auto lex = parse("good,0.7\nbad,-0.4\n");
  EXPECT_DOUBLE_EQ(score({"not", "good"}, lex).polarity, -0.7);
  // Window 1: a negator two tokens back does not apply.
  EXPECT_DOUBLE_EQ(score({"not", "very", "good"}, lex).polarity, 0.7);
  EXPECT_DOUBLE_EQ(score({"dont", "bad", "good"}, lex).polarity, (0.4 + 0.7) / 2.0);
}

TEST(Score, ExactMeanBoundednessAndPermutationInvariance) {
  Lexicon lex;
  Rng rng(12);
  std::vector<std::string> vocab;
  for (int i = 0; i < 30; ++i) {
    vocab.push_back("w" + std::to_string(i));
    lex.entries[vocab.back()] = rng.uniform(-1.0, 1.0);
  }
  vocab.push_back("filler");
  vocab.push_back("not");
  lex.negators = {"not"};
  Lexicon plain = lex;
  plain.negators.clear();
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<std::string> toks;
    for (int i = 0; i < 12; ++i) toks.push_back(vocab[rng.below(vocab.size())]);
    // Independent recomputation of the signed mean.
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      auto it = lex.entries.find(toks[i]);
      if (it == lex.entries.end()) continue;
      sum += (i > 0 && toks[i - 1] == "not") ? -it->second : it->second;
      ++n;
    }
    const auto s = score(toks, lex);
    EXPECT_EQ(s.matched_terms, n);
    EXPECT_NEAR(s.polarity, n ? sum / static_cast<double>(n) : 0.0, 1e-15);
    EXPECT_GE(s.polarity, -1.0);
    EXPECT_LE(s.polarity, 1.0);

    const double before = score(toks, plain).polarity;
    auto shuffled = toks;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    EXPECT_NEAR(score(shuffled, plain).polarity, before, 1e-15);
  }
}
