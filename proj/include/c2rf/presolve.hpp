#pragma once

// Reductions of the tree weighting model that keep its optimum:
//   * points whose class is decided by every admissible alpha are fixed,
//   * the target count drops by the weight fixed positive,
//   * identical tree rows collapse into one weighted tree,
//   * identical point columns collapse into one weighted point.
// The map records enough to lift a reduced solution to the full model.

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "c2rf/c2rf_model.hpp"

namespace c2rf {

/// phi_i is the smallest and psi_i the largest activity any alpha in
/// [ell, u] can give point i. phi_i >= 1 forces z_i = 1, psi_i <= -1 forces 0.
struct FixReport {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
  std::vector<double> phi;
  std::vector<double> psi;
};

inline FixReport fix_variables(const VoteMatrix& r, double ell, double u) {
  FixReport rep;
  const auto& tw = r.tree_weights();
  for (std::size_t i = 0; i < r.num_points(); ++i) {
    long against = 0;
    long in_favour = 0;
    for (std::size_t j = 0; j < r.num_trees(); ++j)
      (r.vote(j, i) < 0 ? against : in_favour) += tw[j];
    const double phi = -u * static_cast<double>(against) + ell * static_cast<double>(in_favour);
    const double psi = -ell * static_cast<double>(against) + u * static_cast<double>(in_favour);
    rep.phi.push_back(phi);
    rep.psi.push_back(psi);
    if (phi >= 1.0)
      rep.positive.push_back(i);
    else if (psi <= -1.0)
      rep.negative.push_back(i);
  }
  return rep;
}

inline long update_lambda(long lambda, long fixed_positive) {
  return std::max(0L, lambda - fixed_positive);
}

/// Members are indices into the matrix the group was formed from; the
/// representative is the smallest member.
struct Group {
  std::size_t representative = 0;
  std::vector<std::size_t> members;
};

namespace detail {

template <class Key>
std::vector<Group> group_equal(std::size_t count, Key&& key) {
  std::vector<Group> groups;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t k = 0; k < count; ++k) {
    auto [it, inserted] = seen.emplace(key(k), groups.size());
    if (inserted) groups.push_back({k, {}});
    groups[it->second].members.push_back(k);
  }
  return groups;
}

inline std::string column_key(const VoteMatrix& r, std::size_t i) {
  std::string s(r.num_trees(), '\0');
  for (std::size_t j = 0; j < r.num_trees(); ++j) s[j] = r.vote(j, i) > 0 ? '+' : '-';
  return s;
}

inline std::string row_key(const VoteMatrix& r, std::size_t j) {
  const auto row = r.row(j);
  std::string s(row.size(), '\0');
  for (std::size_t i = 0; i < row.size(); ++i) s[i] = row[i] > 0 ? '+' : '-';
  return s;
}

}  // namespace detail

inline std::pair<VoteMatrix, std::vector<Group>> merge_points(const VoteMatrix& r) {
  auto groups = detail::group_equal(r.num_points(),
                                    [&](std::size_t i) { return detail::column_key(r, i); });
  VoteMatrix out(r.num_trees(), groups.size());
  std::vector<long> w;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t j = 0; j < r.num_trees(); ++j)
      out.set(j, g, r.vote(j, groups[g].representative));
    long total = 0;
    for (auto i : groups[g].members) total += r.point_weights()[i];
    w.push_back(total);
  }
  out.set_tree_weights(r.tree_weights());
  out.set_point_weights(std::move(w));
  return {std::move(out), std::move(groups)};
}

inline std::pair<VoteMatrix, std::vector<Group>> merge_trees(const VoteMatrix& r) {
  auto groups = detail::group_equal(r.num_trees(),
                                    [&](std::size_t j) { return detail::row_key(r, j); });
  VoteMatrix out(groups.size(), r.num_points());
  std::vector<long> w;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i = 0; i < r.num_points(); ++i)
      out.set(g, i, r.vote(groups[g].representative, i));
    long total = 0;
    for (auto j : groups[g].members) total += r.tree_weights()[j];
    w.push_back(total);
  }
  out.set_tree_weights(std::move(w));
  out.set_point_weights(r.point_weights());
  return {std::move(out), std::move(groups)};
}

/// Returns the columns of `r` listed in `keep`, in order.
inline VoteMatrix select_points(const VoteMatrix& r, const std::vector<std::size_t>& keep) {
  VoteMatrix out(r.num_trees(), keep.size());
  std::vector<long> w;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (std::size_t j = 0; j < r.num_trees(); ++j) out.set(j, k, r.vote(j, keep[k]));
    w.push_back(r.point_weights()[keep[k]]);
  }
  out.set_tree_weights(r.tree_weights());
  out.set_point_weights(std::move(w));
  return out;
}

struct PresolveStats {
  std::size_t trees_before = 0;
  std::size_t trees_after = 0;
  std::size_t points_before = 0;
  std::size_t points_after = 0;
  std::size_t fixed_positive = 0;
  std::size_t fixed_negative = 0;
  std::size_t trees_merged = 0;
  std::size_t points_merged = 0;
  /// lambda_reduced exceeds the remaining weighted point count; the reduced
  /// model stays feasible (eta absorbs the gap) but no z reaches the target.
  bool target_out_of_reach = false;
};

/// All indices refer to the input matrix. point_groups members index the
/// input points; tree_groups members index the input trees.
struct PresolveMap {
  std::size_t trees = 0;
  std::size_t points = 0;
  FixReport fixed;
  std::vector<Group> tree_groups;
  std::vector<Group> point_groups;
  long lambda_original = 0;
  long lambda_reduced = 0;
  /// eta in the input model = eta in the reduced model + eta_offset. Nonzero
  /// when the points fixed positive alone exceed the target.
  long eta_offset = 0;
  PresolveStats stats;
};

struct PresolveResult {
  VoteMatrix reduced;
  long lambda = 0;
  PresolveMap map;
};

/// fix -> drop fixed columns -> lower the target -> merge trees -> merge points.
inline PresolveResult presolve(const VoteMatrix& r, long lambda, double ell, double u) {
  if (lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
  PresolveResult out;
  auto& map = out.map;
  map.trees = r.num_trees();
  map.points = r.num_points();
  map.lambda_original = lambda;
  map.fixed = fix_variables(r, ell, u);

  std::vector<char> is_fixed(r.num_points(), 0);
  long fixed_weight = 0;
  for (auto i : map.fixed.positive) {
    is_fixed[i] = 1;
    fixed_weight += r.point_weights()[i];
  }
  for (auto i : map.fixed.negative) is_fixed[i] = 1;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < r.num_points(); ++i)
    if (!is_fixed[i]) keep.push_back(i);

  map.lambda_reduced = update_lambda(lambda, fixed_weight);
  map.eta_offset = std::max(0L, fixed_weight - lambda);

  const auto kept = select_points(r, keep);
  auto [by_tree, tree_groups] = merge_trees(kept);
  auto [reduced, point_groups] = merge_points(by_tree);
  for (auto& g : point_groups) {
    g.representative = keep[g.representative];
    for (auto& k : g.members) k = keep[k];
  }
  map.tree_groups = std::move(tree_groups);
  map.point_groups = std::move(point_groups);

  auto& st = map.stats;
  st.trees_before = r.num_trees();
  st.points_before = r.num_points();
  st.trees_after = reduced.num_trees();
  st.points_after = reduced.num_points();
  st.fixed_positive = map.fixed.positive.size();
  st.fixed_negative = map.fixed.negative.size();
  st.trees_merged = r.num_trees() - reduced.num_trees();
  st.points_merged = keep.size() - reduced.num_points();
  st.target_out_of_reach = map.lambda_reduced > reduced.effective_points();

  out.lambda = map.lambda_reduced;
  out.reduced = std::move(reduced);
  return out;
}

/// Expands a reduced solution: trees copy their group's weight, points copy
/// their group's z, fixed points take their forced value. eta is recomputed
/// as the exact deviation of the lifted z, which equals reduced eta + offset
/// when the reduced eta is exact.
inline Solution lift_solution(const Solution& reduced, const PresolveMap& map,
                              const VoteMatrix& original) {
  if (original.num_trees() != map.trees || original.num_points() != map.points)
    throw std::invalid_argument("lift: map does not match the original matrix");
  Solution s;
  s.status = reduced.status;
  s.stats = reduced.stats;
  if (!reduced.has_point()) return s;
  if (reduced.alpha.size() != map.tree_groups.size() ||
      reduced.z.size() != map.point_groups.size())
    throw std::invalid_argument("lift: solution does not match the presolve map");

  s.alpha.assign(map.trees, 0.0);
  for (std::size_t g = 0; g < map.tree_groups.size(); ++g)
    for (auto j : map.tree_groups[g].members) s.alpha[j] = reduced.alpha[g];
  s.z.assign(map.points, 0);
  for (auto i : map.fixed.positive) s.z[i] = 1;
  for (auto i : map.fixed.negative) s.z[i] = 0;
  for (std::size_t g = 0; g < map.point_groups.size(); ++g)
    for (auto i : map.point_groups[g].members) s.z[i] = reduced.z[g];
  s.eta = cardinality_gap(original, s.z, map.lambda_original);
  if (s.stats.lower_bound > -milp::kInf)
    s.stats.lower_bound += static_cast<double>(map.eta_offset);
  return s;
}

// Serialization -------------------------------------------------------------

inline nlohmann::json to_json(const PresolveStats& st) {
  return {{"trees_before", st.trees_before},     {"trees_after", st.trees_after},
          {"points_before", st.points_before},   {"points_after", st.points_after},
          {"fixed_positive", st.fixed_positive}, {"fixed_negative", st.fixed_negative},
          {"trees_merged", st.trees_merged},     {"points_merged", st.points_merged},
          {"target_out_of_reach", st.target_out_of_reach}};
}

inline PresolveStats presolve_stats_from_json(const nlohmann::json& j) {
  PresolveStats st;
  st.trees_before = j.at("trees_before").get<std::size_t>();
  st.trees_after = j.at("trees_after").get<std::size_t>();
  st.points_before = j.at("points_before").get<std::size_t>();
  st.points_after = j.at("points_after").get<std::size_t>();
  st.fixed_positive = j.at("fixed_positive").get<std::size_t>();
  st.fixed_negative = j.at("fixed_negative").get<std::size_t>();
  st.trees_merged = j.at("trees_merged").get<std::size_t>();
  st.points_merged = j.at("points_merged").get<std::size_t>();
  st.target_out_of_reach = j.at("target_out_of_reach").get<bool>();
  return st;
}

inline nlohmann::json to_json(const PresolveMap& map) {
  auto groups = [](const std::vector<Group>& gs) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& g : gs) a.push_back(g.members);
    return a;
  };
  return {{"format", "c2rf-presolve-map"},
          {"version", kFormatVersion},
          {"trees", map.trees},
          {"points", map.points},
          {"fixed_positive", map.fixed.positive},
          {"fixed_negative", map.fixed.negative},
          {"phi", map.fixed.phi},
          {"psi", map.fixed.psi},
          {"tree_groups", groups(map.tree_groups)},
          {"point_groups", groups(map.point_groups)},
          {"lambda_original", map.lambda_original},
          {"lambda_reduced", map.lambda_reduced},
          {"eta_offset", map.eta_offset},
          {"stats", to_json(map.stats)}};
}

inline PresolveMap presolve_map_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-presolve-map");
  PresolveMap map;
  map.trees = j.at("trees").get<std::size_t>();
  map.points = j.at("points").get<std::size_t>();
  map.fixed.positive = j.at("fixed_positive").get<std::vector<std::size_t>>();
  map.fixed.negative = j.at("fixed_negative").get<std::vector<std::size_t>>();
  map.fixed.phi = j.at("phi").get<std::vector<double>>();
  map.fixed.psi = j.at("psi").get<std::vector<double>>();
  auto groups = [](const nlohmann::json& a, std::size_t limit) {
    std::vector<Group> gs;
    for (const auto& members : a) {
      Group g;
      g.members = members.get<std::vector<std::size_t>>();
      if (g.members.empty()) throw std::runtime_error("presolve map has an empty group");
      for (auto k : g.members)
        if (k >= limit) throw std::runtime_error("presolve map index out of range");
      g.representative = *std::min_element(g.members.begin(), g.members.end());
      gs.push_back(std::move(g));
    }
    return gs;
  };
  map.tree_groups = groups(j.at("tree_groups"), map.trees);
  map.point_groups = groups(j.at("point_groups"), map.points);
  map.lambda_original = j.at("lambda_original").get<long>();
  map.lambda_reduced = j.at("lambda_reduced").get<long>();
  map.eta_offset = j.at("eta_offset").get<long>();
  if (j.contains("stats")) map.stats = presolve_stats_from_json(j["stats"]);
  return map;
}

}  // namespace c2rf
