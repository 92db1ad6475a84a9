#pragma once

// LP-based branch and bound for models whose integer variables are binary or
// small boxed integers, plus the exhaustive oracle for the tree weighting
// model.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <queue>
#include <vector>

#include "c2rf/c2rf_model.hpp"
#include "c2rf/simplex.hpp"

namespace c2rf::milp {

enum class NodeSelection { best_bound, depth_first };

/// Row whose integer part counts "positives" toward `target`. The up child is
/// explored first while the node's LP count falls short of the target.
struct CardinalityHint {
  std::size_t row = 0;
  double target = 0.0;
};

struct TraceRow {
  std::size_t node = 0;
  std::size_t depth = 0;
  double bound = 0.0;
  std::size_t fractional = 0;
  long branch_var = -1;  // -1 when the node was not branched
  double global_bound = 0.0;  // over this node and every open node
};

struct BnbConfig {
  /// Per-variable priority; larger branches first. Empty: most fractional.
  std::vector<long> priorities;
  double gap = 1e-6;
  /// Every feasible objective is an integer, so node bounds may be rounded up.
  bool integral_objective = false;
  double time_limit = 7200.0;
  std::size_t node_limit = 0;  // 0: unlimited
  NodeSelection selection = NodeSelection::best_bound;
  std::optional<CardinalityHint> cardinality;
  /// Optional child order: +1 explores the up child first, -1 the down child,
  /// 0 defers to the cardinality hint. Receives the branching variable and
  /// the node's LP point.
  std::function<int(std::size_t, const std::vector<double>&)> direction;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-6;
  SimplexOptions lp;
  std::function<void(const TraceRow&)> trace;
};

struct MilpResult {
  SolveStatus status = SolveStatus::unknown;
  double objective = kInf;
  std::vector<double> x;
  /// Proven lower bound on the optimum (equals objective when optimal).
  double bound = -kInf;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  double seconds = 0.0;
  std::vector<double> incumbent_history;
};

namespace detail {

struct BoundChange {
  std::shared_ptr<const BoundChange> parent;
  std::size_t var;
  double lb;
  double ub;
};

struct OpenNode {
  std::size_t id;
  std::size_t depth;
  double bound;
  std::shared_ptr<const BoundChange> changes;
};

struct WorseBound {
  bool operator()(const OpenNode& a, const OpenNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace detail

inline MilpResult solve_milp(const MilpModel& model, const BnbConfig& cfg = {}) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

  validate(model);
  const std::size_t n = model.num_vars();
  if (!cfg.priorities.empty() && cfg.priorities.size() != n)
    throw std::invalid_argument("priority vector must have one entry per variable");

  std::vector<std::size_t> int_vars;
  for (std::size_t j = 0; j < n; ++j)
    if (model.variables[j].integer) int_vars.push_back(j);

  SimplexEngine engine(model, cfg.lp);
  MilpResult result;
  std::vector<char> touched(n, 0);

  auto apply = [&](const std::shared_ptr<const detail::BoundChange>& chain) {
    engine.reset_bounds();
    std::fill(touched.begin(), touched.end(), 0);
    // Deeper changes are at least as tight as their ancestors.
    for (auto c = chain.get(); c; c = c->parent.get()) {
      if (touched[c->var]) continue;
      touched[c->var] = 1;
      engine.set_bounds(c->var, c->lb, c->ub);
    }
  };

  auto effective = [&](double b) {
    return cfg.integral_objective ? std::ceil(b - cfg.feasibility_tol) : b;
  };
  auto pruned_by_incumbent = [&](double b) {
    return result.objective < kInf && effective(b) >= result.objective - cfg.gap;
  };

  auto solve_node = [&]() -> LpResult {
    auto lp = engine.solve();
    if (lp.status == LpStatus::iteration_limit) {
      engine.reset_basis();
      lp = engine.solve();
    }
    return lp;
  };

  // Rounds the integers of an integral LP point, pins them and re-solves for
  // the continuous part so the stored point satisfies the rows exactly.
  auto try_incumbent = [&](const std::vector<double>& x) {
    for (auto j : int_vars) {
      const double v = std::round(x[j]);
      engine.set_bounds(j, v, v);
    }
    const auto lp = solve_node();
    if (lp.status != LpStatus::optimal) return;
    if (max_violation(model, lp.x) > cfg.feasibility_tol) return;
    if (lp.objective < result.objective - cfg.gap || result.objective == kInf) {
      result.objective = lp.objective;
      result.x = lp.x;
      for (auto j : int_vars) result.x[j] = std::round(result.x[j]);
      result.incumbent_history.push_back(lp.objective);
    }
  };

  std::priority_queue<detail::OpenNode, std::vector<detail::OpenNode>, detail::WorseBound> heap;
  std::vector<detail::OpenNode> stack;
  std::size_t next_id = 0;
  bool hit_limit = false;
  bool lost_node = false;  // an LP could not be solved; optimality is unproven
  double lost_bound = kInf;

  std::optional<detail::OpenNode> current = detail::OpenNode{next_id++, 0, -kInf, nullptr};

  auto pop_next = [&]() -> std::optional<detail::OpenNode> {
    if (cfg.selection == NodeSelection::depth_first) {
      if (stack.empty()) return std::nullopt;
      auto node = stack.back();
      stack.pop_back();
      return node;
    }
    if (heap.empty()) return std::nullopt;
    auto node = heap.top();
    heap.pop();
    return node;
  };
  auto push_open = [&](detail::OpenNode node) {
    if (cfg.selection == NodeSelection::depth_first)
      stack.push_back(std::move(node));
    else
      heap.push(std::move(node));
  };

  while (true) {
    if (!current) {
      current = pop_next();
      if (!current) break;
    }
    auto node = std::move(*current);
    current.reset();
    if (pruned_by_incumbent(node.bound)) continue;
    if ((cfg.node_limit && result.nodes >= cfg.node_limit) || elapsed() >= cfg.time_limit) {
      push_open(std::move(node));
      hit_limit = true;
      break;
    }

    apply(node.changes);
    const auto lp = solve_node();
    ++result.nodes;
    TraceRow row{node.id, node.depth, node.bound, 0, -1, node.bound};
    if (cfg.trace) {
      if (cfg.selection == NodeSelection::depth_first) {
        for (const auto& s : stack) row.global_bound = std::min(row.global_bound, s.bound);
      } else if (!heap.empty()) {
        row.global_bound = std::min(row.global_bound, heap.top().bound);
      }
      if (result.objective < kInf) row.global_bound = std::min(row.global_bound, result.objective);
    }

    if (lp.status == LpStatus::infeasible) {
      if (cfg.trace) cfg.trace(row);
      continue;
    }
    if (lp.status == LpStatus::iteration_limit) {
      lost_node = true;
      lost_bound = std::min(lost_bound, node.bound);
      if (cfg.trace) cfg.trace(row);
      continue;
    }
    const double bound = std::max(node.bound, lp.objective);
    row.bound = bound;
    if (pruned_by_incumbent(bound)) {
      if (cfg.trace) cfg.trace(row);
      continue;
    }

    std::optional<std::size_t> branch;
    double best_score = -1.0;
    long best_priority = 0;
    for (auto j : int_vars) {
      const double v = lp.x[j];
      const double frac = std::abs(v - std::round(v));
      if (frac <= cfg.integrality_tol) continue;
      ++row.fractional;
      const double dist = std::min(v - std::floor(v), std::ceil(v) - v);
      if (!cfg.priorities.empty()) {
        if (!branch || cfg.priorities[j] > best_priority) {
          branch = j;
          best_priority = cfg.priorities[j];
        }
      } else if (!branch || dist > best_score + 1e-12) {
        branch = j;
        best_score = dist;
      }
    }

    if (!branch) {
      try_incumbent(lp.x);
      if (cfg.trace) cfg.trace(row);
      continue;
    }
    row.branch_var = static_cast<long>(*branch);
    if (cfg.trace) cfg.trace(row);

    const std::size_t j = *branch;
    const double v = lp.x[j];
    const double child_bound = effective(bound);
    detail::OpenNode down{next_id++, node.depth + 1, child_bound,
                          std::make_shared<detail::BoundChange>(
                              detail::BoundChange{node.changes, j, engine.lower(j), std::floor(v)})};
    detail::OpenNode up{next_id++, node.depth + 1, child_bound,
                        std::make_shared<detail::BoundChange>(
                            detail::BoundChange{node.changes, j, std::ceil(v), engine.upper(j)})};

    bool up_first = v - std::floor(v) >= 0.5;
    if (cfg.cardinality) {
      double count = 0.0;
      for (const auto& e : model.constraints[cfg.cardinality->row].entries)
        if (model.variables[e.var].integer)
          count += e.coef * lp.x[e.var];
      up_first = count < cfg.cardinality->target - cfg.feasibility_tol;
    }
    if (cfg.direction) {
      const int d = cfg.direction(j, lp.x);
      if (d != 0) up_first = d > 0;
    }
    // Plunge into the preferred child, keep the other for later.
    if (up_first) {
      push_open(std::move(down));
      current = std::move(up);
    } else {
      push_open(std::move(up));
      current = std::move(down);
    }
  }

  double open_bound = kInf;
  if (current) open_bound = std::min(open_bound, current->bound);
  if (cfg.selection == NodeSelection::depth_first) {
    for (const auto& s : stack) open_bound = std::min(open_bound, s.bound);
  } else if (!heap.empty()) {
    open_bound = std::min(open_bound, heap.top().bound);
  }
  open_bound = std::min(open_bound, lost_bound);

  const bool complete = !hit_limit && !lost_node;
  if (result.objective < kInf) {
    result.status = complete ? SolveStatus::optimal : SolveStatus::feasible;
    result.bound = complete ? result.objective : std::min(result.objective, open_bound);
  } else {
    result.status = complete ? SolveStatus::infeasible : SolveStatus::unknown;
    result.bound = complete ? kInf : open_bound;
  }
  result.lp_iterations = engine.total_iterations();
  result.seconds = elapsed();
  return result;
}

}  // namespace c2rf::milp

namespace c2rf {

inline std::vector<double> branching_theta(const VoteMatrix& r) {
  std::vector<double> theta(r.num_points());
  const auto t_eff = static_cast<double>(r.effective_trees());
  for (std::size_t i = 0; i < theta.size(); ++i)
    theta[i] = t_eff > 0 ? std::abs(static_cast<double>(r.vote_sum(i))) / t_eff : 0.0;
  return theta;
}

/// Dense 0-based ranks in increasing order; equal values share a rank.
inline std::vector<long> dense_ranks(const std::vector<double>& values) {
  std::vector<double> levels = values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<long> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = std::lower_bound(levels.begin(), levels.end(), values[i]) - levels.begin();
  return out;
}

/// theta_i = |weighted mean vote of point i|; the priority of i is the rank of
/// theta_i, so near-unanimous points branch first.
inline std::vector<long> branching_priorities(const VoteMatrix& r) {
  return dense_ranks(branching_theta(r));
}

struct C2rfSolveOptions {
  bool use_priorities = false;
  /// Dive toward the side of the margin row the node's alpha already favours.
  bool follow_activity = true;
  milp::BnbConfig bnb;
};

/// Builds and solves the model for `r`. The reported eta is the exact
/// deviation of the returned z.
inline Solution solve_c2rf(const VoteMatrix& r, const ModelSpec& spec,
                           const C2rfSolveOptions& opts = {}) {
  const auto model = build_milp(r, spec);
  const auto lay = layout_of(r);
  auto cfg = opts.bnb;
  cfg.integral_objective = true;
  cfg.cardinality = milp::CardinalityHint{lay.points, static_cast<double>(spec.lambda)};
  if (opts.use_priorities) {
    const auto xi = branching_priorities(r);
    cfg.priorities.assign(lay.size(), 0);
    for (std::size_t i = 0; i < lay.points; ++i) cfg.priorities[lay.z(i)] = xi[i];
  } else {
    cfg.priorities.clear();
  }
  if (opts.follow_activity && !cfg.direction) {
    cfg.direction = [&r, lay](std::size_t var, const std::vector<double>& x) {
      if (var < lay.z(0)) return 0;
      const std::size_t i = var - lay.z(0);
      double a = 0.0;
      for (std::size_t j = 0; j < lay.trees; ++j)
        a += static_cast<double>(r.tree_weights()[j] * r.vote(j, i)) * x[lay.alpha(j)];
      return a > 0.0 ? 1 : (a < 0.0 ? -1 : 0);
    };
  }
  const auto res = milp::solve_milp(model, cfg);

  Solution s;
  if (!res.x.empty()) {
    s = extract_solution(r, res.x);
    s.eta = cardinality_gap(r, s.z, spec.lambda);
  }
  s.status = res.status;
  s.stats.nodes = res.nodes;
  s.stats.lp_iterations = res.lp_iterations;
  s.stats.seconds = res.seconds;
  s.stats.lower_bound = res.bound;
  return s;
}

/// True when some alpha in [ell, u]^t puts every point on the side z asks for
/// with unit margin.
inline bool alpha_feasible(const VoteMatrix& r, const std::vector<int>& z, double ell, double u,
                           std::vector<double>* alpha = nullptr) {
  milp::MilpModel lp;
  for (std::size_t j = 0; j < r.num_trees(); ++j) lp.add_variable("a" + std::to_string(j), ell, u);
  for (std::size_t i = 0; i < r.num_points(); ++i) {
    std::vector<milp::Entry> e;
    for (std::size_t j = 0; j < r.num_trees(); ++j)
      e.push_back({j, static_cast<double>(r.tree_weights()[j] * r.vote(j, i))});
    if (z[i])
      lp.add_constraint("p" + std::to_string(i), std::move(e), 1.0, milp::kInf);
    else
      lp.add_constraint("n" + std::to_string(i), std::move(e), -milp::kInf, -1.0);
  }
  const auto res = milp::solve_lp(lp);
  if (res.status != milp::LpStatus::optimal) return false;
  if (alpha) *alpha = res.x;
  return true;
}

inline constexpr std::size_t kOracleMaxPoints = 20;

/// Exhaustive search over z in order of |sum c_i z_i - lambda|, then
/// lexicographically; the first alpha-feasible assignment is optimal.
inline Solution brute_force_solve(const VoteMatrix& r, long lambda, double ell, double u) {
  const std::size_t m = r.num_points();
  if (m > kOracleMaxPoints) throw std::invalid_argument("oracle limited to 20 points");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t count = std::size_t{1} << m;
  auto z_of = [&](std::size_t mask) {
    std::vector<int> z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = (mask >> (m - 1 - i)) & 1;
    return z;
  };
  // Bit m-1-i holds z_i, so ascending masks are ascending lexicographic z.
  std::vector<std::pair<long, std::size_t>> order(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    long s = 0;
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> (m - 1 - i)) & 1) s += r.point_weights()[i];
    order[mask] = {std::abs(s - lambda), mask};
  }
  std::sort(order.begin(), order.end());

  Solution best;
  best.status = SolveStatus::infeasible;
  for (const auto& [gap, mask] : order) {
    auto z = z_of(mask);
    std::vector<double> alpha;
    ++best.stats.nodes;
    if (alpha_feasible(r, z, ell, u, &alpha)) {
      best.alpha = std::move(alpha);
      best.z = std::move(z);
      best.eta = static_cast<double>(gap);
      best.status = SolveStatus::optimal;
      break;
    }
  }
  best.stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  best.stats.lower_bound = best.status == SolveStatus::optimal ? best.eta : milp::kInf;
  return best;
}

}  // namespace c2rf
