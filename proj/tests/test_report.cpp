#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tweetcast/report.hpp"

using namespace tweetcast;
using namespace tweetcast::testing;

TEST(Quantile, TypeSevenValues) {
  // Reference values from numpy.quantile's default (linear) method.
  const std::vector<double> s = {1, 1, 2, 3, 4, 5, 6, 9};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 3.5);
  EXPECT_NEAR(quantile_sorted(s, 0.9), 6.9, 1e-12);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 9.0);
  EXPECT_THROW(quantile_sorted(std::vector<double>{}, 0.5), DataError);
}

TEST(Boxplot, OneToFive) {
  const std::vector<double> x = {5, 3, 1, 4, 2};
  const auto b = boxplot(x);
  EXPECT_EQ(b.n, 5u);
  EXPECT_DOUBLE_EQ(b.q1, 2.0);
  EXPECT_DOUBLE_EQ(b.median, 3.0);
  EXPECT_DOUBLE_EQ(b.q3, 4.0);
  EXPECT_DOUBLE_EQ(b.min, 1.0);
  EXPECT_DOUBLE_EQ(b.max, 5.0);
  EXPECT_TRUE(b.outliers.empty());
}

TEST(Boxplot, OutliersLeaveTheWhiskers) {
  const std::vector<double> x = {1, 2, 3, 4, 5, 100, -50};
  const auto b = boxplot(x);
  EXPECT_EQ(b.outliers, (std::vector<double>{-50, 100}));
  EXPECT_DOUBLE_EQ(b.min, 1.0);
  EXPECT_DOUBLE_EQ(b.max, 5.0);
}

TEST(Boxplot, OrderingProperty) {
  Rng rng(61);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(1 + rng.below(50));
    for (auto& v : x) v = rng.normal(0.0, 1.0) * (rng.below(10) == 0 ? 20.0 : 1.0);
    const auto b = boxplot(x);
    EXPECT_LE(b.min, b.q1 + 1e-12);
    EXPECT_LE(b.q1, b.median);
    EXPECT_LE(b.median, b.q3);
    EXPECT_LE(b.q3, b.max + 1e-12);
    for (double o : b.outliers) EXPECT_TRUE(o < b.min || o > b.max);
  }
}

TEST(Skewness, ReferenceAndSymmetry) {
  // scipy.stats.skew([1, 2, 3, 10], bias=False)
  EXPECT_NEAR(skewness(std::vector<double>{1, 2, 3, 10}), 1.763632614803888, 1e-12);
  EXPECT_NEAR(skewness(std::vector<double>{-3, -1, 0, 1, 3}), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(skewness(std::vector<double>{2, 2, 2}), 0.0);
  EXPECT_THROW(skewness(std::vector<double>{1, 2}), DataError);

  Rng rng(62);
  std::vector<double> x(40), mirrored(40);
  for (std::size_t i = 0; i < 40; ++i) mirrored[i] = -(x[i] = rng.gamma(2.0));
  EXPECT_NEAR(skewness(x), -skewness(mirrored), 1e-12);
}

TEST(Histogram, MassesSumToOne) {
  Rng rng(63);
  for (std::size_t bins : {1u, 5u, 20u}) {
    std::vector<double> x(200);
    for (auto& v : x) v = rng.normal(1.0, 3.0);
    const auto h = normalized_histogram(x, bins);
    ASSERT_EQ(h.edges.size(), bins + 1);
    double mass = 0.0;
    for (std::size_t b = 0; b < bins; ++b) mass += h.density[b] * (h.edges[b + 1] - h.edges[b]);
    EXPECT_NEAR(mass, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(h.edges.front(), *std::min_element(x.begin(), x.end()));
  }
  const auto flat = normalized_histogram(std::vector<double>{4, 4, 4}, 2);
  EXPECT_DOUBLE_EQ(flat.edges.front(), 3.5);
  EXPECT_DOUBLE_EQ(flat.density[0] + flat.density[1], 2.0);
}
