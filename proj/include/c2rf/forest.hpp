#pragma once

// Decision-tree ensemble trained on random subsets of the labeled points, and
// the tree-by-point vote matrix it produces on the unlabeled points.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "c2rf/dataset.hpp"
#include "c2rf/rng.hpp"

namespace c2rf {

struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t min_samples_leaf = 1;
};

/// CART classifier: Gini impurity, axis-aligned splits `x[f] <= threshold`.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = -1;
  };

  DecisionTree() = default;
  DecisionTree(std::size_t dims, std::vector<Node> nodes) : dims_(dims), nodes_(std::move(nodes)) {}

  /// Splits until leaves are pure, max_depth is reached, or no split exists.
  /// Candidate ties resolve to the lowest feature index, then lowest threshold.
  static DecisionTree fit(const Dataset& data, std::span<const std::size_t> rows,
                          std::span<const int> labels, const TreeParams& params) {
    if (rows.size() != labels.size()) throw std::invalid_argument("fit: size mismatch");
    if (rows.empty()) throw std::invalid_argument("fit: no training points");
    DecisionTree tree;
    tree.dims_ = data.dims;
    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    tree.grow(data, rows, labels, order, 0, params);
    return tree;
  }

  int predict(std::span<const double> x) const {
    if (x.size() != dims_) throw std::invalid_argument("predict: feature dimension mismatch");
    int k = 0;
    while (nodes_[k].feature >= 0)
      k = x[nodes_[k].feature] <= nodes_[k].threshold ? nodes_[k].left : nodes_[k].right;
    return nodes_[k].label;
  }

  std::size_t dims() const { return dims_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::size_t depth() const { return depth_of(0); }

 private:
  static int majority(std::size_t pos, std::size_t neg) { return pos > neg ? 1 : -1; }

  std::size_t depth_of(int k) const {
    if (nodes_[k].feature < 0) return 0;
    return 1 + std::max(depth_of(nodes_[k].left), depth_of(nodes_[k].right));
  }

  // `members` are positions into rows/labels. Returns the node index.
  int grow(const Dataset& data, std::span<const std::size_t> rows, std::span<const int> labels,
           std::vector<std::size_t> members, std::size_t depth, const TreeParams& params) {
    std::size_t pos = 0;
    for (auto k : members) pos += labels[k] > 0;
    const std::size_t neg = members.size() - pos;
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{-1, 0.0, -1, -1, majority(pos, neg)});
    if (pos == 0 || neg == 0 || depth >= params.max_depth ||
        members.size() < 2 * std::max<std::size_t>(1, params.min_samples_leaf))
      return index;

    const double n = static_cast<double>(members.size());
    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = members;
    for (std::size_t f = 0; f < data.dims; ++f) {
      auto value = [&](std::size_t k) { return data.at(rows[k], f); };
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
      std::size_t left_pos = 0;
      for (std::size_t s = 0; s + 1 < sorted.size(); ++s) {
        left_pos += labels[sorted[s]] > 0;
        const double a = value(sorted[s]);
        const double b = value(sorted[s + 1]);
        if (a == b) continue;
        const std::size_t nl = s + 1;
        const std::size_t nr = sorted.size() - nl;
        if (nl < params.min_samples_leaf || nr < params.min_samples_leaf) continue;
        const double pl = static_cast<double>(left_pos) / nl;
        const double pr = static_cast<double>(pos - left_pos) / nr;
        const double gini_l = 2.0 * pl * (1.0 - pl);
        const double gini_r = 2.0 * pr * (1.0 - pr);
        const double score = (nl * gini_l + nr * gini_r) / n;
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          double mid = 0.5 * (a + b);
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto k : members)
      (data.at(rows[k], static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right)
          .push_back(k);
    nodes_[index].feature = best_feature;
    nodes_[index].threshold = best_threshold;
    const int l = grow(data, rows, labels, std::move(left), depth + 1, params);
    nodes_[index].left = l;
    const int r = grow(data, rows, labels, std::move(right), depth + 1, params);
    nodes_[index].right = r;
    return index;
  }

  std::size_t dims_ = 0;
  std::vector<Node> nodes_;
};

struct ForestOptions {
  std::size_t trees = 20;
  double subset_fraction = 0.2;
  std::uint64_t seed = 0;
  TreeParams tree;
  /// Worker threads for training; results do not depend on it.
  std::size_t threads = 1;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::vector<std::size_t>> subset_indices;  // dataset indices per tree
  ForestOptions options;
};

/// Trains `trees` CART trees, tree j on d = round(subset_fraction * n) labeled
/// points drawn without replacement from its own seeded stream.
inline Forest train_forest(const Dataset& data, const SplitDataset& split,
                           const ForestOptions& opts) {
  if (opts.trees < 1) throw std::invalid_argument("forest needs at least one tree");
  const std::size_t n = split.n();
  const auto d = static_cast<std::size_t>(std::llround(opts.subset_fraction * n));
  if (d < 1) throw std::invalid_argument("training subset size rounds to zero");
  if (d > n) throw std::invalid_argument("training subset larger than the labeled set");

  Forest forest;
  forest.options = opts;
  forest.trees.resize(opts.trees);
  forest.subset_indices.resize(opts.trees);

  auto train_one = [&](std::size_t j) {
    Rng rng(derive_seed(opts.seed, j));
    std::vector<std::size_t> pick(n);
    std::iota(pick.begin(), pick.end(), 0);
    for (std::size_t k = 0; k < d; ++k) std::swap(pick[k], pick[k + rng.uniform_index(n - k)]);
    pick.resize(d);
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    for (auto k : pick) {
      rows.push_back(split.labeled[k]);
      labels.push_back(split.labeled_labels[k]);
    }
    forest.trees[j] = DecisionTree::fit(data, rows, labels, opts.tree);
    forest.subset_indices[j] = std::move(rows);
  };

  const std::size_t workers = std::clamp<std::size_t>(opts.threads, 1, opts.trees);
  if (workers == 1) {
    for (std::size_t j = 0; j < opts.trees; ++j) train_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < opts.trees; j = next++) train_one(j);
      });
    for (auto& th : pool) th.join();
  }
  return forest;
}

/// t x m matrix of per-tree votes in {-1, +1}, with integer multiplicities for
/// trees and points that stand for merged duplicates.
class VoteMatrix {
 public:
  VoteMatrix() = default;
  VoteMatrix(std::size_t trees, std::size_t points)
      : t_(trees), m_(points), votes_(trees * points, 1), tree_w_(trees, 1), point_w_(points, 1) {}

  /// Builds from rows of votes (one row per tree).
  static VoteMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    const std::size_t t = rows.size();
    const std::size_t m = t ? rows[0].size() : 0;
    VoteMatrix r(t, m);
    for (std::size_t j = 0; j < t; ++j) {
      if (rows[j].size() != m) throw std::invalid_argument("vote rows differ in length");
      for (std::size_t i = 0; i < m; ++i) r.set(j, i, rows[j][i]);
    }
    return r;
  }

  std::size_t num_trees() const { return t_; }
  std::size_t num_points() const { return m_; }

  int vote(std::size_t tree, std::size_t point) const { return votes_[tree * m_ + point]; }
  void set(std::size_t tree, std::size_t point, int v) {
    if (v != 1 && v != -1) throw std::invalid_argument("votes must be -1 or +1");
    votes_[tree * m_ + point] = static_cast<signed char>(v);
  }

  std::span<const signed char> row(std::size_t tree) const {
    return {votes_.data() + tree * m_, m_};
  }
  std::vector<signed char> column(std::size_t point) const {
    std::vector<signed char> c(t_);
    for (std::size_t j = 0; j < t_; ++j) c[j] = votes_[j * m_ + point];
    return c;
  }

  const std::vector<long>& tree_weights() const { return tree_w_; }
  const std::vector<long>& point_weights() const { return point_w_; }
  void set_tree_weights(std::vector<long> w) {
    if (w.size() != t_) throw std::invalid_argument("tree weight count mismatch");
    for (long v : w)
      if (v < 1) throw std::invalid_argument("tree weights must be positive");
    tree_w_ = std::move(w);
  }
  void set_point_weights(std::vector<long> w) {
    if (w.size() != m_) throw std::invalid_argument("point weight count mismatch");
    for (long v : w)
      if (v < 1) throw std::invalid_argument("point weights must be positive");
    point_w_ = std::move(w);
  }

  long effective_trees() const { return std::accumulate(tree_w_.begin(), tree_w_.end(), 0L); }
  long effective_points() const { return std::accumulate(point_w_.begin(), point_w_.end(), 0L); }

  bool unit_weights() const {
    return std::all_of(tree_w_.begin(), tree_w_.end(), [](long w) { return w == 1; }) &&
           std::all_of(point_w_.begin(), point_w_.end(), [](long w) { return w == 1; });
  }

  /// Weighted vote sum for a point with every tree weight alpha_j = 1.
  long vote_sum(std::size_t point) const {
    long s = 0;
    for (std::size_t j = 0; j < t_; ++j) s += tree_w_[j] * votes_[j * m_ + point];
    return s;
  }

  friend bool operator==(const VoteMatrix&, const VoteMatrix&) = default;

 private:
  std::size_t t_ = 0;
  std::size_t m_ = 0;
  std::vector<signed char> votes_;
  std::vector<long> tree_w_;
  std::vector<long> point_w_;
};

inline VoteMatrix vote_matrix(const Forest& forest, const Dataset& data,
                              std::span<const std::size_t> points) {
  VoteMatrix r(forest.trees.size(), points.size());
  for (std::size_t j = 0; j < forest.trees.size(); ++j) {
    if (forest.trees[j].dims() != data.dims)
      throw std::invalid_argument("vote_matrix: feature dimension mismatch");
    for (std::size_t i = 0; i < points.size(); ++i)
      r.set(j, i, forest.trees[j].predict(data.point(points[i])));
  }
  return r;
}

/// Sign of the weighted vote sum per point; ties go to -1.
inline std::vector<int> majority_vote(const VoteMatrix& r) {
  std::vector<int> out(r.num_points());
  for (std::size_t i = 0; i < r.num_points(); ++i) out[i] = r.vote_sum(i) > 0 ? 1 : -1;
  return out;
}

// Serialization -------------------------------------------------------------

inline nlohmann::json to_json(const VoteMatrix& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < r.num_trees(); ++j) {
    auto row = r.row(j);
    rows.push_back(std::vector<int>(row.begin(), row.end()));
  }
  return {{"format", "c2rf-votes"},
          {"version", kFormatVersion},
          {"trees", r.num_trees()},
          {"points", r.num_points()},
          {"votes", rows},
          {"tree_weights", r.tree_weights()},
          {"point_weights", r.point_weights()}};
}

inline VoteMatrix votes_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-votes");
  const auto& rows = j.at("votes");
  // The shape keys are optional; when present they must agree with the rows.
  const auto t = j.value("trees", rows.size());
  const auto m = j.value("points", rows.empty() ? std::size_t{0} : rows[0].size());
  if (rows.size() != t) throw std::runtime_error("vote matrix has wrong number of rows");
  VoteMatrix r(t, m);
  for (std::size_t a = 0; a < t; ++a) {
    if (rows[a].size() != m) throw std::runtime_error("vote row has wrong length");
    for (std::size_t i = 0; i < m; ++i) r.set(a, i, rows[a][i].get<int>());
  }
  if (j.contains("tree_weights")) r.set_tree_weights(j["tree_weights"].get<std::vector<long>>());
  if (j.contains("point_weights"))
    r.set_point_weights(j["point_weights"].get<std::vector<long>>());
  return r;
}

/// One line per tree, comma-separated +-1 entries. Weights are not stored.
inline void write_votes_csv(std::ostream& out, const VoteMatrix& r) {
  for (std::size_t j = 0; j < r.num_trees(); ++j) {
    for (std::size_t i = 0; i < r.num_points(); ++i) out << (i ? "," : "") << r.vote(j, i);
    out << '\n';
  }
}

inline VoteMatrix read_votes_csv(std::istream& in) {
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<int> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto v = detail::trim(cell);
      if (v == "1" || v == "+1")
        row.push_back(1);
      else if (v == "-1")
        row.push_back(-1);
      else
        throw std::runtime_error("votes CSV line " + std::to_string(line_no) + ": bad entry '" +
                                 v + "'");
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw std::runtime_error("votes CSV line " + std::to_string(line_no) +
                               ": inconsistent row length");
    rows.push_back(std::move(row));
  }
  return VoteMatrix::from_rows(rows);
}

inline nlohmann::json to_json(const Forest& f) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : f.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes())
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    trees.push_back({{"dims", tree.dims()}, {"nodes", nodes}});
  }
  return {{"format", "c2rf-forest"},
          {"version", kFormatVersion},
          {"options",
           {{"trees", f.options.trees},
            {"subset_fraction", f.options.subset_fraction},
            {"seed", f.options.seed},
            {"max_depth", f.options.tree.max_depth},
            {"min_samples_leaf", f.options.tree.min_samples_leaf}}},
          {"subset_indices", f.subset_indices},
          {"trees", trees}};
}

inline Forest forest_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-forest");
  Forest f;
  const auto& o = j.at("options");
  f.options.trees = o.at("trees").get<std::size_t>();
  f.options.subset_fraction = o.at("subset_fraction").get<double>();
  f.options.seed = o.at("seed").get<std::uint64_t>();
  f.options.tree.max_depth = o.at("max_depth").get<std::size_t>();
  f.options.tree.min_samples_leaf = o.at("min_samples_leaf").get<std::size_t>();
  f.subset_indices = j.at("subset_indices").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& t : j.at("trees")) {
    std::vector<DecisionTree::Node> nodes;
    for (const auto& n : t.at("nodes"))
      nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<int>(), n[3].get<int>(),
                       n[4].get<int>()});
    f.trees.emplace_back(t.at("dims").get<std::size_t>(), std::move(nodes));
  }
  return f;
}

}  // namespace c2rf
