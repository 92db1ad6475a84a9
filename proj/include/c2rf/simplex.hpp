#pragma once

// Bounded-variable primal simplex for the LP relaxation of a MilpModel.
//
// Each row r gets a logical variable s_r = a_r^T x with bounds [row_lb, row_ub],
// giving the equality system [A  -I] (x, s) = 0 in which every structural
// variable is boxed. The basis inverse is kept as an explicit dense matrix
// (column-major) with product-form updates and periodic refactorization.
//
// Phase 1 minimizes the sum of bound violations of basic variables; phase 2
// the model objective. Pricing is Dantzig's rule, switching to Bland's rule
// after a streak of degenerate pivots. Bound overrides and basis reuse make the
// engine suitable for branch-and-bound; any nonsingular basis is a valid
// starting point, so warm starts never affect the result's correctness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "c2rf/milp_model.hpp"

namespace c2rf::milp {

enum class LpStatus { optimal, infeasible, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::iteration_limit: return "iteration-limit";
  }
  return "?";
}

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;  // structural values
  std::size_t iterations = 0;
};

struct BoundOverride {
  std::size_t var;
  double lb;
  double ub;
};

struct SimplexOptions {
  double primal_tol = 1e-7;
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  /// 0 selects 10 * (rows + columns) basis changes per solve call.
  std::size_t iteration_limit = 0;
  std::size_t refactor_interval = 0;  // 0: max(64, rows)
  std::size_t degenerate_streak = 30;
};

class SimplexEngine {
 public:
  enum class State : unsigned char { basic, at_lower, at_upper };

  explicit SimplexEngine(const MilpModel& model, SimplexOptions opts = {})
      : opts_(opts), n_(model.num_vars()), m_(model.num_rows()) {
    validate(model);
    const std::size_t total = n_ + m_;
    root_lb_.resize(total);
    root_ub_.resize(total);
    cost_.assign(total, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      root_lb_[j] = model.variables[j].lb;
      root_ub_[j] = model.variables[j].ub;
      cost_[j] = model.objective[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      root_lb_[n_ + r] = model.constraints[r].lb;
      root_ub_[n_ + r] = model.constraints[r].ub;
    }
    // Structural columns in compressed form; duplicates within a row are summed.
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(n_);
    for (std::size_t r = 0; r < m_; ++r)
      for (const auto& e : model.constraints[r].entries) {
        if (e.coef == 0.0) continue;
        auto& c = cols[e.var];
        if (!c.empty() && c.back().first == r)
          c.back().second += e.coef;
        else
          c.emplace_back(r, e.coef);
      }
    col_start_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) {
      col_start_[j + 1] = col_start_[j] + cols[j].size();
      for (const auto& [r, v] : cols[j]) {
        col_row_.push_back(r);
        col_val_.push_back(v);
      }
    }
    lb_ = root_lb_;
    ub_ = root_ub_;
    reset_basis();
  }

  std::size_t num_structural() const { return n_; }
  std::size_t num_rows() const { return m_; }

  /// Restore every structural bound to the model's.
  void reset_bounds() {
    std::copy(root_lb_.begin(), root_lb_.begin() + static_cast<std::ptrdiff_t>(n_), lb_.begin());
    std::copy(root_ub_.begin(), root_ub_.begin() + static_cast<std::ptrdiff_t>(n_), ub_.begin());
  }

  void set_bounds(std::size_t var, double lb, double ub) {
    if (var >= n_) throw std::out_of_range("set_bounds: variable index");
    if (lb > ub) throw std::invalid_argument("set_bounds: lb > ub");
    lb_[var] = lb;
    ub_[var] = ub;
  }

  double lower(std::size_t var) const { return lb_[var]; }
  double upper(std::size_t var) const { return ub_[var]; }

  /// Slack basis, structurals at their lower bounds.
  void reset_basis() {
    state_.assign(n_ + m_, State::at_lower);
    head_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      head_[r] = n_ + r;
      state_[n_ + r] = State::basic;
    }
    factor_valid_ = false;
  }

  LpResult solve() {
    const std::size_t limit =
        opts_.iteration_limit ? opts_.iteration_limit : 10 * (m_ + n_ + m_);
    LpResult result;
    if (!factor_valid_ && !refactor()) {
      reset_basis();
      refactor();
    }
    place_nonbasics();
    compute_basics();

    std::size_t degenerate = 0;
    std::size_t iter = 0;
    bool verified = false;
    while (true) {
      if (since_refactor_ >= refactor_interval()) {
        if (!refactor()) {
          reset_basis();
          refactor();
        }
        compute_basics();
      }
      const bool phase1 = infeasibility() > 0.0;
      compute_duals(phase1);
      const bool use_bland = degenerate >= opts_.degenerate_streak;
      const auto entering = price(phase1, use_bland);
      if (!entering) {
        // Recompute basic values from scratch before declaring a verdict.
        if (!verified) {
          verified = true;
          compute_basics();
          continue;
        }
        result.status = phase1 ? LpStatus::infeasible : LpStatus::optimal;
        break;
      }
      verified = false;
      if (iter >= limit) {
        result.status = LpStatus::iteration_limit;
        break;
      }
      const double step = iterate(entering->first, entering->second, phase1);
      ++iter;
      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
    }
    result.iterations = iter;
    total_iterations_ += iter;
    result.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    result.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) result.objective += cost_[j] * result.x[j];
    return result;
  }

  std::size_t total_iterations() const { return total_iterations_; }

 private:
  std::size_t refactor_interval() const {
    return opts_.refactor_interval ? opts_.refactor_interval : std::max<std::size_t>(64, m_);
  }

  // Column j of [A -I] scattered into a dense vector of length m.
  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else {
      f(j - n_, -1.0);
    }
  }

  double& binv(std::size_t row, std::size_t col) { return binv_[col * m_ + row]; }

  /// Dense Gauss-Jordan inversion of the current basis. False when singular.
  bool refactor() {
    since_refactor_ = 0;
    if (m_ == 0) {
      factor_valid_ = true;
      return true;
    }
    // work holds [B | I] row-major with width 2m.
    const std::size_t w = 2 * m_;
    std::vector<double> work(m_ * w, 0.0);
    for (std::size_t p = 0; p < m_; ++p)
      for_column(head_[p], [&](std::size_t r, double v) { work[r * w + p] = v; });
    for (std::size_t r = 0; r < m_; ++r) work[r * w + m_ + r] = 1.0;
    std::vector<std::size_t> nz;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      double best = std::abs(work[c * w + c]);
      for (std::size_t r = c + 1; r < m_; ++r) {
        const double v = std::abs(work[r * w + c]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < opts_.pivot_tol) {
        factor_valid_ = false;
        return false;
      }
      if (piv != c)
        std::swap_ranges(work.begin() + static_cast<std::ptrdiff_t>(c * w),
                         work.begin() + static_cast<std::ptrdiff_t>((c + 1) * w),
                         work.begin() + static_cast<std::ptrdiff_t>(piv * w));
      const double inv = 1.0 / work[c * w + c];
      double* prow = &work[c * w];
      nz.clear();
      for (std::size_t k = c; k < w; ++k) {
        if (prow[k] == 0.0) continue;
        prow[k] *= inv;
        nz.push_back(k);
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        double* row = &work[r * w];
        const double f = row[c];
        if (f == 0.0) continue;
        for (const std::size_t k : nz) row[k] -= f * prow[k];
      }
    }
    // After elimination column c of B maps to basis position c, so row p of
    // the right block is row p of B^{-1}.
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t p = 0; p < m_; ++p)
      for (std::size_t r = 0; r < m_; ++r) binv(p, r) = work[p * w + m_ + r];
    factor_valid_ = true;
    return true;
  }

  void place_nonbasics() {
    x_.resize(n_ + m_);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic) continue;
      if (state_[j] == State::at_lower && !std::isfinite(lb_[j])) state_[j] = State::at_upper;
      if (state_[j] == State::at_upper && !std::isfinite(ub_[j])) state_[j] = State::at_lower;
      x_[j] = state_[j] == State::at_lower ? lb_[j] : ub_[j];
    }
  }

  void compute_basics() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic || x_[j] == 0.0) continue;
      const double xv = x_[j];
      for_column(j, [&](std::size_t r, double v) { rhs[r] -= v * xv; });
    }
    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (rhs[r] == 0.0) continue;
      const double* col = &binv_[r * m_];
      for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] += col[p] * rhs[r];
    }
  }

  double violation(std::size_t j) const {
    if (x_[j] < lb_[j] - opts_.primal_tol) return lb_[j] - x_[j];
    if (x_[j] > ub_[j] + opts_.primal_tol) return x_[j] - ub_[j];
    return 0.0;
  }

  double infeasibility() const {
    double s = 0.0;
    for (std::size_t p = 0; p < m_; ++p) s += violation(head_[p]);
    return s;
  }

  void compute_duals(bool phase1) {
    std::vector<double> cb(m_);
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      if (phase1) {
        cb[p] = x_[j] < lb_[j] - opts_.primal_tol ? -1.0
                : x_[j] > ub_[j] + opts_.primal_tol ? 1.0
                                                     : 0.0;
      } else {
        cb[p] = cost_[j];
      }
    }
    nz_.clear();
    for (std::size_t p = 0; p < m_; ++p)
      if (cb[p] != 0.0) nz_.push_back(p);
    dual_.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const double* col = &binv_[r * m_];
      double s = 0.0;
      for (const std::size_t p : nz_) s += cb[p] * col[p];
      dual_[r] = s;
    }
  }

  double reduced_cost(std::size_t j, bool phase1) const {
    double d = phase1 ? 0.0 : cost_[j];
    for_column(j, [&](std::size_t r, double v) { d -= dual_[r] * v; });
    return d;
  }

  // Returns (column, direction) with direction +1 to increase, -1 to decrease.
  std::optional<std::pair<std::size_t, int>> price(bool phase1, bool bland) const {
    std::optional<std::pair<std::size_t, int>> best;
    double best_score = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (state_[j] == State::basic || lb_[j] == ub_[j]) continue;
      const double d = reduced_cost(j, phase1);
      int dir = 0;
      if (state_[j] == State::at_lower && d < -opts_.optimality_tol) dir = 1;
      if (state_[j] == State::at_upper && d > opts_.optimality_tol) dir = -1;
      if (dir == 0) continue;
      if (bland) return std::make_pair(j, dir);
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = std::make_pair(j, dir);
      }
    }
    return best;
  }

  // One simplex step; returns the step length taken.
  double iterate(std::size_t q, int dir, bool phase1) {
    std::vector<double> alpha(m_, 0.0);
    for_column(q, [&](std::size_t r, double v) {
      const double* col = &binv_[r * m_];
      for (std::size_t p = 0; p < m_; ++p) alpha[p] += col[p] * v;
    });
    // x_B changes at rate -dir * alpha per unit step of x_q.
    double theta = ub_[q] - lb_[q];
    std::size_t leave = m_;
    bool leave_to_upper = false;
    double leave_pivot = 0.0;
    for (std::size_t p = 0; p < m_; ++p) {
      if (std::abs(alpha[p]) < opts_.pivot_tol) continue;
      const std::size_t j = head_[p];
      const double rate = -dir * alpha[p];
      double limit = kInf;
      bool to_upper = false;
      const bool below = phase1 && x_[j] < lb_[j] - opts_.primal_tol;
      const bool above = phase1 && x_[j] > ub_[j] + opts_.primal_tol;
      if (below) {
        if (rate > 0) limit = (lb_[j] - x_[j]) / rate;
      } else if (above) {
        if (rate < 0) {
          limit = (x_[j] - ub_[j]) / -rate;
          to_upper = true;
        }
      } else if (rate > 0) {
        if (std::isfinite(ub_[j])) {
          limit = std::max(0.0, (ub_[j] - x_[j]) / rate);
          to_upper = true;
        }
      } else if (std::isfinite(lb_[j])) {
        limit = std::max(0.0, (x_[j] - lb_[j]) / -rate);
      }
      const bool shorter = limit < theta - 1e-12;
      const bool tie_better =
          limit <= theta + 1e-12 && leave < m_ && std::abs(alpha[p]) > leave_pivot;
      if (shorter || tie_better) {
        theta = std::min(theta, limit);
        leave = p;
        leave_to_upper = to_upper;
        leave_pivot = std::abs(alpha[p]);
      }
    }
    if (!std::isfinite(theta)) throw std::logic_error("simplex: unbounded direction in boxed LP");

    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] -= theta * dir * alpha[p];
    x_[q] += theta * dir;

    if (leave == m_) {
      // Bound flip of the entering variable.
      state_[q] = dir > 0 ? State::at_upper : State::at_lower;
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      return theta;
    }
    const std::size_t out = head_[leave];
    state_[out] = leave_to_upper ? State::at_upper : State::at_lower;
    x_[out] = leave_to_upper ? ub_[out] : lb_[out];
    state_[q] = State::basic;
    head_[leave] = q;

    const double piv = alpha[leave];
    nz_.clear();
    for (std::size_t p = 0; p < m_; ++p)
      if (alpha[p] != 0.0 && p != leave) nz_.push_back(p);
    for (std::size_t c = 0; c < m_; ++c) {
      double* col = &binv_[c * m_];
      if (col[leave] == 0.0) continue;
      const double v = col[leave] / piv;
      for (const std::size_t p : nz_) col[p] -= alpha[p] * v;
      col[leave] = v;
    }
    ++since_refactor_;
    return theta;
  }

  SimplexOptions opts_;
  std::size_t n_;
  std::size_t m_;
  std::vector<std::size_t> col_start_;
  std::vector<std::size_t> col_row_;
  std::vector<double> col_val_;
  std::vector<double> root_lb_, root_ub_, lb_, ub_, cost_;
  std::vector<State> state_;
  std::vector<std::size_t> head_;
  std::vector<double> binv_;
  std::vector<double> x_;
  std::vector<double> dual_;
  std::vector<std::size_t> nz_;  // scratch index list
  bool factor_valid_ = false;
  std::size_t since_refactor_ = 0;
  std::size_t total_iterations_ = 0;
};

/// Solves the LP relaxation of `model` (integrality ignored) with optional
/// per-variable bound overrides.
inline LpResult solve_lp(const MilpModel& model, std::span<const BoundOverride> overrides = {},
                         SimplexOptions opts = {}) {
  SimplexEngine engine(model, opts);
  for (const auto& o : overrides) engine.set_bounds(o.var, o.lb, o.ub);
  return engine.solve();
}

}  // namespace c2rf::milp
