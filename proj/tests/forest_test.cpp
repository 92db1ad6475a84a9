#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "c2rf/forest.hpp"

using namespace c2rf;

namespace {

struct Fixture {
  Dataset data;
  SplitDataset split;
};

Fixture gaussian_fixture(std::size_t count, double fraction, std::uint64_t seed) {
  Fixture f;
  f.data = make_two_gaussians(count, 3, 2.5, 0.5, seed);
  SampleOptions o;
  o.mode = SamplingMode::simple;
  o.labeled_fraction = fraction;
  o.seed = seed;
  f.split = draw_sample(f.data, o);
  return f;
}

DecisionTree stump(double threshold) {
  // x <= threshold -> -1, otherwise +1
  return DecisionTree(1, {{0, threshold, 1, 2, -1}, {-1, 0, -1, -1, -1}, {-1, 0, -1, -1, 1}});
}

DecisionTree constant(std::size_t dims, int label) {
  return DecisionTree(dims, {{-1, 0, -1, -1, label}});
}

}  // namespace

TEST(Forest, TwentyTreesOnTwentyPoints) {
  const auto f = gaussian_fixture(1000, 0.1, 4);  // n = 100
  ASSERT_EQ(f.split.n(), 100u);
  ForestOptions o;
  o.trees = 20;
  o.subset_fraction = 0.2;
  o.seed = 11;
  const auto forest = train_forest(f.data, f.split, o);
  ASSERT_EQ(forest.trees.size(), 20u);
  for (const auto& a : forest.subset_indices) {
    EXPECT_EQ(a.size(), 20u);
    std::vector<std::size_t> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
    for (auto i : a)
      EXPECT_TRUE(std::binary_search(f.split.labeled.begin(), f.split.labeled.end(), i));
  }
}

TEST(Forest, SingleTreeOnAllLabeled) {
  const auto f = gaussian_fixture(200, 0.2, 2);
  ForestOptions o;
  o.trees = 1;
  o.subset_fraction = 1.0;
  const auto forest = train_forest(f.data, f.split, o);
  ASSERT_EQ(forest.trees.size(), 1u);
  auto a = forest.subset_indices[0];
  std::sort(a.begin(), a.end());
  EXPECT_EQ(a, f.split.labeled);
}

TEST(Forest, DeterministicAndThreadIndependent) {
  const auto f = gaussian_fixture(2000, 0.05, 8);
  ForestOptions o;
  o.seed = 77;
  const auto a = train_forest(f.data, f.split, o);
  const auto b = train_forest(f.data, f.split, o);
  o.threads = 4;
  const auto c = train_forest(f.data, f.split, o);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(to_json(a), to_json(c));
  EXPECT_EQ(vote_matrix(a, f.data, f.split.unlabeled), vote_matrix(c, f.data, f.split.unlabeled));
}

TEST(Forest, Errors) {
  const auto f = gaussian_fixture(100, 0.1, 1);  // n = 10
  ForestOptions o;
  o.subset_fraction = 0.01;  // d rounds to 0
  EXPECT_THROW(train_forest(f.data, f.split, o), std::invalid_argument);
  o.subset_fraction = 0.5;
  o.trees = 0;
  EXPECT_THROW(train_forest(f.data, f.split, o), std::invalid_argument);
}

TEST(Forest, SingleClassSubsetGivesConstantTree) {
  Dataset d;
  d.dims = 1;
  d.values = {1, 2, 3};
  d.labels = {1, 1, 1};
  d.ids = {0, 1, 2};
  const std::size_t rows[] = {0, 1, 2};
  const int labels[] = {1, 1, 1};
  const auto tree = DecisionTree::fit(d, rows, labels, {});
  EXPECT_EQ(tree.nodes().size(), 1u);
  const double x[] = {-50.0};
  EXPECT_EQ(tree.predict(x), 1);
}

TEST(Forest, TrainingErrorNoWorseThanConstant) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Dataset d;
    d.dims = 1 + rng.uniform_index(3);
    const std::size_t count = 2 + rng.uniform_index(40);
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < d.dims; ++j)
        d.values.push_back(static_cast<double>(rng.uniform_index(5)));
      d.labels.push_back(rng.bernoulli(0.4) ? 1 : -1);
      d.ids.push_back(i);
      rows.push_back(i);
      labels.push_back(d.labels.back());
    }
    TreeParams p;
    p.max_depth = 1 + rng.uniform_index(6);
    const auto tree = DecisionTree::fit(d, rows, labels, p);
    EXPECT_LE(tree.depth(), p.max_depth);
    std::size_t errors = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < count; ++i) {
      errors += tree.predict(d.point(i)) != d.labels[i];
      pos += d.labels[i] > 0;
    }
    EXPECT_LE(errors, std::min(pos, count - pos)) << "trial " << trial;
  }
}

TEST(Forest, PureLeavesOnSeparableData) {
  Dataset d;
  d.dims = 2;
  d.values = {0, 0, 1, 0, 0, 1, 1, 1};
  d.labels = {-1, 1, 1, -1};  // xor
  d.ids = {0, 1, 2, 3};
  const std::size_t rows[] = {0, 1, 2, 3};
  const auto tree = DecisionTree::fit(d, rows, d.labels, {});
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(tree.predict(d.point(i)), d.labels[i]);
}

TEST(VoteMatrixBuild, ConstantTreeRowAllPlus) {
  Forest f;
  f.trees = {constant(1, 1), stump(0.0)};
  Dataset d;
  d.dims = 1;
  d.values = {-2, -1, 0, 0.5, 3};
  d.labels = {-1, -1, -1, 1, 1};
  d.ids = {0, 1, 2, 3, 4};
  const std::size_t pts[] = {0, 1, 2, 3, 4};
  const auto r = vote_matrix(f, d, pts);
  ASSERT_EQ(r.num_trees(), 2u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.vote(0, i), 1);
  // Stump at 0 reproduces the sign of the feature (0 itself goes left).
  const int expected[] = {-1, -1, -1, 1, 1};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.vote(1, i), expected[i]);
  EXPECT_TRUE(r.unit_weights());
}

TEST(VoteMatrixBuild, EmptyPointSet) {
  Forest f;
  f.trees = {stump(0.0)};
  Dataset d;
  d.dims = 1;
  const auto r = vote_matrix(f, d, {});
  EXPECT_EQ(r.num_trees(), 1u);
  EXPECT_EQ(r.num_points(), 0u);
  EXPECT_TRUE(majority_vote(r).empty());
}

TEST(VoteMatrixBuild, DimensionMismatch) {
  Forest f;
  f.trees = {constant(2, 1)};
  Dataset d;
  d.dims = 1;
  d.values = {0.0};
  d.labels = {1};
  d.ids = {0};
  const std::size_t pts[] = {0};
  EXPECT_THROW(vote_matrix(f, d, pts), std::invalid_argument);
}

TEST(VoteMatrixBuild, EntriesMatchTreePredictions) {
  const auto f = gaussian_fixture(1500, 0.1, 6);
  ForestOptions o;
  o.seed = 5;
  const auto forest = train_forest(f.data, f.split, o);
  const auto r = vote_matrix(forest, f.data, f.split.unlabeled);
  Rng rng(1);
  for (int k = 0; k < 300; ++k) {
    const auto j = rng.uniform_index(r.num_trees());
    const auto i = rng.uniform_index(r.num_points());
    EXPECT_EQ(r.vote(j, i), forest.trees[j].predict(f.data.point(f.split.unlabeled[i])));
  }
}

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote(VoteMatrix::from_rows({{1}, {1}, {-1}})), std::vector<int>{1});
  EXPECT_EQ(majority_vote(VoteMatrix::from_rows({{1}, {-1}})), std::vector<int>{-1});
  EXPECT_EQ(majority_vote(VoteMatrix::from_rows({{1, 1, 1}, {1, 1, 1}})),
            (std::vector<int>{1, 1, 1}));
}

TEST(MajorityVote, UsesTreeWeights) {
  auto r = VoteMatrix::from_rows({{1, -1}, {-1, 1}, {-1, 1}});
  r.set_tree_weights({3, 1, 1});
  EXPECT_EQ(majority_vote(r), (std::vector<int>{1, -1}));
}

TEST(MajorityVote, InvariantUnderTreePermutation) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 1 + rng.uniform_index(8);
    const std::size_t m = 1 + rng.uniform_index(10);
    std::vector<std::vector<int>> rows(t, std::vector<int>(m));
    for (auto& row : rows)
      for (auto& v : row) v = rng.bernoulli(0.5) ? 1 : -1;
    const auto base = majority_vote(VoteMatrix::from_rows(rows));
    for (std::size_t k = t - 1; k > 0; --k) std::swap(rows[k], rows[rng.uniform_index(k + 1)]);
    EXPECT_EQ(majority_vote(VoteMatrix::from_rows(rows)), base);
  }
}

TEST(VoteMatrixIo, JsonAndCsvRoundTrip) {
  auto r = VoteMatrix::from_rows({{1, -1, 1}, {-1, -1, 1}});
  r.set_point_weights({1, 2, 1});
  EXPECT_EQ(votes_from_json(to_json(r)), r);
  std::stringstream csv;
  write_votes_csv(csv, r);
  EXPECT_EQ(csv.str(), "1,-1,1\n-1,-1,1\n");
  const auto back = read_votes_csv(csv);
  EXPECT_EQ(back.num_trees(), 2u);
  EXPECT_EQ(back.vote(1, 0), -1);
  std::istringstream bad("1,0\n");
  EXPECT_THROW(read_votes_csv(bad), std::runtime_error);
  std::istringstream ragged("1,1\n1\n");
  EXPECT_THROW(read_votes_csv(ragged), std::runtime_error);
}

TEST(VoteMatrixIo, ForestJsonRoundTrip) {
  const auto f = gaussian_fixture(600, 0.1, 2);
  ForestOptions o;
  o.seed = 9;
  const auto forest = train_forest(f.data, f.split, o);
  const auto back = forest_from_json(to_json(forest));
  EXPECT_EQ(vote_matrix(back, f.data, f.split.unlabeled),
            vote_matrix(forest, f.data, f.split.unlabeled));
}
