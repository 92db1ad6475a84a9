#pragma once

// Cardinality-constrained tree weighting as a big-M MILP:
//
//   min eta
//   s.t. sum_j w_j r_ij a_j <= -1 + M z_i          (point i voted negative)
//        sum_j w_j r_ij a_j >=  1 - M (1 - z_i)    (point i voted positive)
//        lambda - eta <= sum_i c_i z_i <= lambda + eta
//        ell <= a_j <= u,  0 <= eta <= eta_bar,  z_i in {0,1}
//
// w are tree multiplicities, c point multiplicities. The two margin
// inequalities of a point share one ranged row  1-M <= r_i.a - M z_i <= -1.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "c2rf/forest.hpp"
#include "c2rf/milp_model.hpp"

namespace c2rf {

using milp::SolveStatus;

struct ModelSpec {
  double ell = 1.0;
  double u = 100.0;
  long lambda = 0;
};

inline double big_m(double t_eff, double u) { return u * t_eff + 1.0; }

inline double eta_bar(long lambda, long m_eff) {
  return static_cast<double>(std::max(lambda, m_eff - lambda));
}

inline void check_spec(const ModelSpec& spec) {
  if (!(spec.ell > 0.0) || !(spec.u > spec.ell) || !std::isfinite(spec.u))
    throw std::invalid_argument("weight bounds must satisfy 0 < ell < u < inf");
  if (spec.lambda < 0) throw std::invalid_argument("lambda must be nonnegative");
}

/// Column positions of the fixed variable order: alpha block, eta, z block.
struct ModelLayout {
  std::size_t trees = 0;
  std::size_t points = 0;

  std::size_t alpha(std::size_t j) const { return j; }
  std::size_t eta() const { return trees; }
  std::size_t z(std::size_t i) const { return trees + 1 + i; }
  std::size_t size() const { return trees + 1 + points; }
};

inline ModelLayout layout_of(const VoteMatrix& r) { return {r.num_trees(), r.num_points()}; }

/// Builds the MILP for `r`. M and eta_bar come from the matrix itself.
inline milp::MilpModel build_milp(const VoteMatrix& r, const ModelSpec& spec) {
  check_spec(spec);
  const auto lay = layout_of(r);
  const double m_big = big_m(static_cast<double>(r.effective_trees()), spec.u);
  // lambda may exceed the weighted point count after presolve; eta_bar covers it.
  const double e_bar = eta_bar(spec.lambda, r.effective_points());

  milp::MilpModel model;
  model.name = "c2rf";
  for (std::size_t j = 0; j < lay.trees; ++j)
    model.add_variable("a" + std::to_string(j + 1), spec.ell, spec.u);
  model.add_variable("eta", 0.0, e_bar, false, 1.0);
  for (std::size_t i = 0; i < lay.points; ++i)
    model.add_variable("z" + std::to_string(i + 1), 0.0, 1.0, true);

  const auto& tw = r.tree_weights();
  for (std::size_t i = 0; i < lay.points; ++i) {
    std::vector<milp::Entry> entries;
    entries.reserve(lay.trees + 1);
    for (std::size_t j = 0; j < lay.trees; ++j)
      entries.push_back({lay.alpha(j), static_cast<double>(tw[j] * r.vote(j, i))});
    entries.push_back({lay.z(i), -m_big});
    model.add_constraint("m" + std::to_string(i + 1), std::move(entries), 1.0 - m_big, -1.0);
  }

  const auto& pw = r.point_weights();
  const double lam = static_cast<double>(spec.lambda);
  std::vector<milp::Entry> lo;
  std::vector<milp::Entry> hi;
  for (std::size_t i = 0; i < lay.points; ++i) {
    lo.push_back({lay.z(i), static_cast<double>(pw[i])});
    hi.push_back({lay.z(i), static_cast<double>(pw[i])});
  }
  lo.push_back({lay.eta(), 1.0});
  hi.push_back({lay.eta(), -1.0});
  model.add_constraint("cl", std::move(lo), lam, milp::kInf);
  model.add_constraint("ch", std::move(hi), -milp::kInf, lam);

  model.metadata["trees"] = std::to_string(lay.trees);
  model.metadata["points"] = std::to_string(lay.points);
  model.metadata["lambda"] = std::to_string(spec.lambda);
  model.metadata["big_m"] = std::to_string(m_big);
  model.metadata["eta_bar"] = std::to_string(e_bar);
  return model;
}

struct SolveStats {
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  double seconds = 0.0;
  double lower_bound = 0.0;
};

/// A classification produced by the model: tree weights, deviation from the
/// target count, and z_i = 1 for points classified positive.
struct Solution {
  std::vector<double> alpha;
  double eta = 0.0;
  std::vector<int> z;
  SolveStatus status = SolveStatus::unknown;
  SolveStats stats;

  bool has_point() const {
    return status == SolveStatus::optimal || status == SolveStatus::feasible;
  }
};

/// |sum_i c_i z_i - lambda|, the deviation a 0/1 assignment actually achieves.
inline double cardinality_gap(const VoteMatrix& r, const std::vector<int>& z, long lambda) {
  long s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s += r.point_weights()[i] * z[i];
  return static_cast<double>(std::abs(s - lambda));
}

/// Reads (alpha, eta, z) out of a model-space vector, rounding z.
inline Solution extract_solution(const VoteMatrix& r, const std::vector<double>& x) {
  const auto lay = layout_of(r);
  if (x.size() != lay.size()) throw std::invalid_argument("solution vector has wrong size");
  Solution s;
  s.alpha.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(lay.trees));
  s.eta = x[lay.eta()];
  for (std::size_t i = 0; i < lay.points; ++i) s.z.push_back(x[lay.z(i)] > 0.5 ? 1 : 0);
  return s;
}

/// Largest violation of the model's constraints by (alpha, eta, z), evaluated
/// straight from the vote matrix.
inline double solution_violation(const VoteMatrix& r, const ModelSpec& spec, const Solution& s) {
  const auto lay = layout_of(r);
  if (s.alpha.size() != lay.trees || s.z.size() != lay.points)
    throw std::invalid_argument("solution does not match the vote matrix");
  double worst = 0.0;
  for (double a : s.alpha) worst = std::max({worst, spec.ell - a, a - spec.u});
  worst = std::max({worst, -s.eta, s.eta - eta_bar(spec.lambda, r.effective_points())});
  const double m_big = big_m(static_cast<double>(r.effective_trees()), spec.u);
  for (std::size_t i = 0; i < lay.points; ++i) {
    if (s.z[i] != 0 && s.z[i] != 1) return milp::kInf;
    double act = 0.0;
    for (std::size_t j = 0; j < lay.trees; ++j)
      act += static_cast<double>(r.tree_weights()[j] * r.vote(j, i)) * s.alpha[j];
    worst = std::max(worst, act - (-1.0 + s.z[i] * m_big));
    worst = std::max(worst, (1.0 - (1 - s.z[i]) * m_big) - act);
  }
  worst = std::max(worst, cardinality_gap(r, s.z, spec.lambda) - s.eta);
  return worst;
}

}  // namespace c2rf
