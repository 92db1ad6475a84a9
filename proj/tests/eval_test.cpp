#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "c2rf/eval.hpp"
#include "c2rf/rng.hpp"

using namespace c2rf;

TEST(Confusion, Examples) {
  const std::vector<int> t1{1, -1};
  EXPECT_EQ(confusion(t1, t1), (Confusion{1, 1, 0, 0}));
  const std::vector<int> neg{-1, 1};
  const auto c = confusion(neg, t1);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.tn, 0);
  const std::vector<int> p{1, 1, -1, -1};
  const std::vector<int> t{1, -1, 1, -1};
  EXPECT_EQ(confusion(p, t), (Confusion{1, 1, 1, 1}));
  const std::vector<int> shorter{1};
  EXPECT_THROW(confusion(shorter, t1), std::invalid_argument);
}

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy({3, 2, 0, 0}), 1.0);
  EXPECT_EQ(accuracy({0, 0, 2, 3}), 0.0);
  EXPECT_EQ(accuracy({1, 1, 1, 1}), 0.5);
  EXPECT_THROW(accuracy({}), std::invalid_argument);
}

TEST(Mcc, Examples) {
  EXPECT_EQ(mcc({5, 5, 0, 0}), 1.0);
  EXPECT_EQ(mcc({0, 0, 5, 5}), -1.0);
  EXPECT_EQ(mcc({5, 0, 5, 0}), 0.0);  // constant +1 prediction
  EXPECT_THROW(mcc({}), std::invalid_argument);
  EXPECT_EQ(mcc_percent(0.0), 50.0);
}

TEST(Mcc, MatchesTextbookValue) {
  // tp=6 tn=3 fp=1 fn=2: (18 - 2) / sqrt(7 * 8 * 4 * 5)
  EXPECT_NEAR(mcc({6, 3, 1, 2}), 16.0 / std::sqrt(1120.0), 1e-15);
}

TEST(Deltas, Examples) {
  EXPECT_EQ(deltas({0.8, 0.3}, {0.8, 0.3}).accuracy, 0.0);
  EXPECT_EQ(deltas({0.8, 0.3}, {0.8, 0.3}).mcc, 0.0);
  EXPECT_NEAR(deltas({0.75, 0.0}, {0.70, 0.0}).accuracy, 0.05, 1e-12);
  EXPECT_GT(deltas({0.9, 0.5}, {0.7, 0.2}).accuracy, 0.0);
}

TEST(Ecdf, Examples) {
  const std::vector<double> a{1, 10, 8000};
  const auto e = ecdf(a, 7200);
  EXPECT_DOUBLE_EQ(e(100), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(e(std::numeric_limits<double>::infinity()), 2.0 / 3.0);
  EXPECT_EQ(e(0.5), 0.0);
  EXPECT_DOUBLE_EQ(e(1.0), 1.0 / 3.0);  // right-continuous

  const std::vector<double> late{8000, 9000};
  const auto none = ecdf(late, 7200);
  EXPECT_TRUE(none.steps.empty());
  EXPECT_EQ(none(1e9), 0.0);

  const std::vector<double> same{4, 4, 4};
  const auto one = ecdf(same, 7200);
  ASSERT_EQ(one.steps.size(), 1u);
  EXPECT_EQ(one.steps[0], (std::pair<double, double>{4.0, 1.0}));

  EXPECT_THROW(ecdf(std::vector<double>{}, 1.0), std::invalid_argument);
  EXPECT_THROW(ecdf(std::vector<double>{-1.0}, 1.0), std::invalid_argument);
}

TEST(Ecdf, MonotoneAndBoundedBySolvedFraction) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> times(1 + rng.uniform_index(30));
    for (auto& t : times)
      t = rng.bernoulli(0.2) ? std::round(rng.uniform01() * 10) : rng.uniform01() * 100;
    const double limit = rng.uniform01() * 100;
    const auto e = ecdf(times, limit);
    std::size_t solved = 0;
    for (double t : times) solved += t <= limit;
    const double frac = static_cast<double>(solved) / times.size();
    EXPECT_DOUBLE_EQ(e.solved_fraction(), frac);
    double prev = 0.0;
    for (double s = 0.0; s <= 110.0; s += 0.37) {
      const double g = e(s);
      EXPECT_GE(g, prev);
      EXPECT_LE(g, frac + 1e-15);
      prev = g;
    }
  }
}

TEST(Metrics, RangesAndLabelFlipSymmetry) {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(40);
    std::vector<int> p(m), t(m), pf(m), tf(m);
    for (std::size_t i = 0; i < m; ++i) {
      p[i] = rng.bernoulli(0.5) ? 1 : -1;
      t[i] = rng.bernoulli(0.5) ? 1 : -1;
      pf[i] = -p[i];
      tf[i] = -t[i];
    }
    const auto a = metrics(p, t);
    const auto b = metrics(pf, tf);
    EXPECT_GE(a.accuracy, 0.0);
    EXPECT_LE(a.accuracy, 1.0);
    EXPECT_GE(a.mcc, -1.0);
    EXPECT_LE(a.mcc, 1.0);
    EXPECT_EQ(a.accuracy, b.accuracy);
    EXPECT_NEAR(a.mcc, b.mcc, 1e-15);
  }
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}
