#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "tweetcast/common.hpp"
#include "tweetcast/time.hpp"

using namespace tweetcast;

TEST(Rng, SameSeedSameStream) {
  Rng a(20), b(20), c(21);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs = differs || x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, SplitStreamsAreIndependentOfDrawOrder) {
  Rng base(7);
  const auto first = base.split(3)();
  base();
  base();
  EXPECT_NE(first, Rng(7).split(4)());
  EXPECT_EQ(first, Rng(7).split(3)());
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto x = r.below(7);
    ASSERT_LT(x, 7u);
    seen.insert(x);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  const int n = 200000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal(3.0, 2.0);
    s += x;
    ss += x * x;
  }
  const double mean = s / n, var = ss / n - mean * mean;
  // Five standard errors.
  EXPECT_NEAR(mean, 3.0, 5.0 * 2.0 / std::sqrt(n));
  EXPECT_NEAR(var, 4.0, 5.0 * 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, GammaAndPoissonMeans) {
  Rng r(3);
  const int n = 100000;
  for (double shape : {0.3, 1.0, 4.5}) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.gamma(shape);
    EXPECT_NEAR(s / n, shape, 5.0 * std::sqrt(shape / n)) << shape;
  }
  for (double mean : {0.5, 12.0, 80.0}) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(mean));
    EXPECT_NEAR(s / n, mean, 5.0 * std::sqrt(mean / n)) << mean;
  }
}

TEST(Rng, DirichletIsADistribution) {
  Rng r(4);
  for (double a : {0.1, 1.0, 10.0}) {
    const auto p = r.dirichlet(5, a);
    double s = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      s += x;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Rng, CategoricalFrequencies) {
  Rng r(5);
  const std::vector<double> w = {1.0, 0.0, 3.0};
  std::vector<int> hits(3, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++hits[r.categorical(w)];
  EXPECT_EQ(hits[1], 0);
  EXPECT_NEAR(hits[2] / static_cast<double>(n), 0.75, 0.02);
}

TEST(Format, DoubleRoundTrips) {
  Rng r(6);
  for (int i = 0; i < 1000; ++i) {
    const double x = r.normal(0.0, 1e6) * std::pow(10.0, static_cast<double>(r.below(20)) - 10.0);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Csv, QuoteSplitRoundTrip) {
  const std::vector<std::string> fields = {"plain", "with,comma", "with \"quote\"", "", "a\"b,c"};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv_quote(fields[i]);
  EXPECT_EQ(csv_split(line), fields);
}

TEST(ColumnTable, RejectsMisalignedColumns) {
  ColumnTable t;
  t.add("a", {1, 2, 3});
  EXPECT_THROW(t.add("b", {1, 2}), DataError);
  EXPECT_THROW(t.column("missing"), DataError);
  EXPECT_EQ(t.rows(), 3u);
}

TEST(Time, ParsesZonesAndFormatsUtc) {
  const auto a = parse_iso8601("2020-10-23T14:05:09Z");
  ASSERT_TRUE(a);
  EXPECT_EQ(format_iso8601(*a), "2020-10-23T14:05:09Z");
  const auto b = parse_iso8601("2020-10-23T16:05:09+02:00");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->seconds, a->seconds);
  EXPECT_EQ(parse_iso8601("2020-10-23 14:05:09.750")->seconds, a->seconds);
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:00Z")->seconds, 0);
  EXPECT_EQ(parse_iso8601("2000-03-01T00:00:00Z")->seconds - parse_iso8601("2000-02-28T00:00:00Z")->seconds,
            2 * 86400);
}

TEST(Time, RejectsMalformed) {
  for (const char* s : {"", "2020-13-01", "2021-02-29T00:00:00Z", "2020-10-23T25:00", "2020/10/23", "2020-10-23Tx"})
    EXPECT_FALSE(parse_iso8601(s)) << s;
}

TEST(Time, FloorIsLeftClosed) {
  EXPECT_EQ(floor_to_interval(UtcTime{600}, 300).seconds, 600);
  EXPECT_EQ(floor_to_interval(UtcTime{899}, 300).seconds, 600);
  EXPECT_EQ(floor_to_interval(UtcTime{-1}, 300).seconds, -300);
  EXPECT_EQ(format_iso8601(UtcTime{-1}), "1969-12-31T23:59:59Z");
}
