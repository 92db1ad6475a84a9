#pragma once

// Generic mixed-integer linear model:
//   min  c^T x
//   s.t. row_lb <= A x <= row_ub
//        lb <= x <= ub,  x_j integer for flagged j.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace c2rf::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Outcome of a MILP solve. `feasible` means a limit stopped the search with
/// an incumbent in hand; `unknown` means a limit stopped it without one.
enum class SolveStatus { optimal, feasible, infeasible, unknown };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unknown: return "unknown";
  }
  return "?";
}

inline SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "optimal") return SolveStatus::optimal;
  if (s == "feasible") return SolveStatus::feasible;
  if (s == "infeasible") return SolveStatus::infeasible;
  if (s == "unknown") return SolveStatus::unknown;
  throw std::invalid_argument("unknown solve status '" + s + "'");
}

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  bool integer = false;
};

struct Entry {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Entry> entries;
  double lb = -kInf;
  double ub = kInf;
};

struct MilpModel {
  std::string name = "model";
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<double> objective;  // dense, one per variable
  std::map<std::string, std::string> metadata;

  std::size_t num_vars() const { return variables.size(); }
  std::size_t num_rows() const { return constraints.size(); }

  std::size_t add_variable(std::string var_name, double lb, double ub, bool integer = false,
                           double cost = 0.0) {
    variables.push_back({std::move(var_name), lb, ub, integer});
    objective.push_back(cost);
    return variables.size() - 1;
  }

  std::size_t add_constraint(std::string row_name, std::vector<Entry> entries, double lb,
                             double ub) {
    constraints.push_back({std::move(row_name), std::move(entries), lb, ub});
    return constraints.size() - 1;
  }

  std::size_t num_integer() const {
    return static_cast<std::size_t>(std::count_if(variables.begin(), variables.end(),
                                                  [](const Variable& v) { return v.integer; }));
  }

  /// Number of finite row sides, i.e. the count of one-sided inequalities the
  /// rows stand for (an equality counts twice).
  std::size_t inequality_count() const {
    std::size_t count = 0;
    for (const auto& c : constraints) count += std::isfinite(c.lb) + std::isfinite(c.ub);
    return count;
  }
};

/// Throws std::invalid_argument when a model invariant is broken.
inline void validate(const MilpModel& model) {
  if (model.objective.size() != model.variables.size())
    throw std::invalid_argument("objective length differs from variable count");
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    const auto& v = model.variables[j];
    if (!std::isfinite(v.lb) || !std::isfinite(v.ub))
      throw std::invalid_argument("variable '" + v.name + "' has an infinite bound");
    if (v.lb > v.ub) throw std::invalid_argument("variable '" + v.name + "' has lb > ub");
    if (!std::isfinite(model.objective[j]))
      throw std::invalid_argument("objective coefficient of '" + v.name + "' is not finite");
  }
  for (const auto& c : model.constraints) {
    if (std::isnan(c.lb) || std::isnan(c.ub) || c.lb > c.ub || c.lb == kInf || c.ub == -kInf)
      throw std::invalid_argument("row '" + c.name + "' has invalid bounds");
    for (const auto& e : c.entries) {
      if (e.var >= model.variables.size())
        throw std::invalid_argument("row '" + c.name + "' references a missing variable");
      if (!std::isfinite(e.coef))
        throw std::invalid_argument("row '" + c.name + "' has a non-finite coefficient");
    }
  }
}

/// Row activity a_r^T x.
inline double activity(const Constraint& row, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& e : row.entries) s += e.coef * x[e.var];
  return s;
}

inline double objective_value(const MilpModel& model, const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t j = 0; j < model.objective.size(); ++j) s += model.objective[j] * x[j];
  return s;
}

/// Largest violation of any variable bound or row bound at x.
inline double max_violation(const MilpModel& model, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    worst = std::max({worst, model.variables[j].lb - x[j], x[j] - model.variables[j].ub});
  }
  for (const auto& row : model.constraints) {
    const double a = activity(row, x);
    worst = std::max({worst, row.lb - a, a - row.ub});
  }
  return worst;
}

/// Equality up to entry order within rows.
inline bool structurally_equal(const MilpModel& a, const MilpModel& b) {
  if (a.variables.size() != b.variables.size() || a.constraints.size() != b.constraints.size())
    return false;
  for (std::size_t j = 0; j < a.variables.size(); ++j) {
    const auto& va = a.variables[j];
    const auto& vb = b.variables[j];
    if (va.name != vb.name || va.lb != vb.lb || va.ub != vb.ub || va.integer != vb.integer ||
        a.objective[j] != b.objective[j])
      return false;
  }
  auto sorted = [](std::vector<Entry> e) {
    std::sort(e.begin(), e.end(), [](const Entry& x, const Entry& y) { return x.var < y.var; });
    return e;
  };
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const auto& ra = a.constraints[i];
    const auto& rb = b.constraints[i];
    if (ra.name != rb.name || ra.lb != rb.lb || ra.ub != rb.ub) return false;
    const auto ea = sorted(ra.entries);
    const auto eb = sorted(rb.entries);
    if (ea.size() != eb.size()) return false;
    for (std::size_t k = 0; k < ea.size(); ++k)
      if (ea[k].var != eb[k].var || ea[k].coef != eb[k].coef) return false;
  }
  return true;
}

}  // namespace c2rf::milp
