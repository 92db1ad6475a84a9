// Acceptance checks. Prints one PASS/FAIL line per criterion; run with
// criterion numbers as arguments to select a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "c2rf/c2rf.hpp"

using namespace c2rf;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

VoteMatrix random_votes(Rng& rng, std::size_t t, std::size_t m) {
  std::vector<std::vector<int>> rows(t, std::vector<int>(m));
  for (auto& row : rows)
    for (auto& v : row) v = rng.bernoulli(0.5) ? 1 : -1;
  return VoteMatrix::from_rows(rows);
}

// Objective of a MILP result as an exact integer, or nullopt when the value
// is not within 1e-6 of one.
std::optional<long> integral(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-6) return std::nullopt;
  return static_cast<long>(r);
}

// 1. Branch and bound agrees with exhaustive search.
Verdict oracle_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(101);
  int n = 0, bad = 0, infeasible = 0;
  for (; n < 250; ++n) {
    const std::size_t t = 2 + rng.uniform_index(4);
    const std::size_t m = 1 + rng.uniform_index(10);
    const long lambda = static_cast<long>(rng.uniform_index(m + 1));
    const double u = rng.bernoulli(0.5) ? 2.0 : 100.0;
    const auto r = random_votes(rng, t, m);
    const auto oracle = brute_force_solve(r, lambda, 1.0, u);
    const auto res = milp::solve_milp(build_milp(r, {1.0, u, lambda}));
    if (oracle.status == SolveStatus::infeasible) {
      ++infeasible;
      bad += res.status != SolveStatus::infeasible;
      continue;
    }
    const auto obj = integral(res.objective);
    bad += res.status != SolveStatus::optimal || !obj ||
           *obj != static_cast<long>(oracle.eta);
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 60.0,
          fmt("%d instances (%d infeasible), %d mismatches, %.1f s (budget 60 s)", n, infeasible,
              bad, secs)};
}

// Random instance with known redundancy: a few distinct non-unanimous base
// columns over a few base trees, then copied trees, copied columns and
// unanimous columns, shuffled.
VoteMatrix redundant_votes(Rng& rng, std::size_t max_points) {
  const std::size_t t0 = 2 + rng.uniform_index(4);
  const std::size_t distinct = (std::size_t{1} << t0) - 2;
  const std::size_t m0 = 1 + rng.uniform_index(std::min<std::size_t>(10, distinct));
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> base;
  while (base.size() < m0) {
    std::vector<int> c(t0);
    for (auto& v : c) v = rng.bernoulli(0.5) ? 1 : -1;
    bool unanimous = true;
    for (int v : c) unanimous &= v == c[0];
    if (!unanimous && seen.insert(c).second) base.push_back(c);
  }
  std::vector<std::size_t> tree_of;  // row -> base tree
  for (std::size_t j = 0; j < t0; ++j)
    for (std::size_t k = 0, copies = 1 + rng.uniform_index(3); k < copies; ++k) tree_of.push_back(j);
  for (std::size_t k = tree_of.size() - 1; k > 0; --k) std::swap(tree_of[k], tree_of[rng.uniform_index(k + 1)]);

  std::vector<std::vector<int>> cols;
  for (const auto& c : base)
    for (std::size_t k = 0, copies = 1 + rng.uniform_index(5); k < copies && cols.size() < max_points; ++k)
      cols.push_back(c);
  for (std::size_t k = 0, extra = rng.uniform_index(11); k < extra && cols.size() < max_points; ++k)
    cols.emplace_back(t0, rng.bernoulli(0.5) ? 1 : -1);
  for (std::size_t k = cols.size() - 1; k > 0; --k) std::swap(cols[k], cols[rng.uniform_index(k + 1)]);

  std::vector<std::vector<int>> rows(tree_of.size(), std::vector<int>(cols.size()));
  for (std::size_t j = 0; j < tree_of.size(); ++j)
    for (std::size_t i = 0; i < cols.size(); ++i) rows[j][i] = cols[i][tree_of[j]];
  return VoteMatrix::from_rows(rows);
}

// 2. Presolve, solve and lift gives the direct optimum.
Verdict presolve_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(202);
  int n = 0, bad = 0, infeasible = 0;
  std::size_t max_raw = 0, max_reduced = 0;
  double worst_violation = 0.0;
  for (; n < 220; ++n) {
    const auto r = redundant_votes(rng, 60);
    const long lambda = static_cast<long>(rng.uniform_index(r.num_points() + 1));
    const double u = rng.bernoulli(0.5) ? 2.0 : 100.0;
    const ModelSpec spec{1.0, u, lambda};
    max_raw = std::max(max_raw, r.num_points());
    const auto direct = solve_c2rf(r, spec);
    const auto pre = presolve(r, lambda, 1.0, u);
    max_reduced = std::max(max_reduced, pre.reduced.num_points());
    C2rfSolveOptions o;
    o.use_priorities = true;
    const auto red = solve_c2rf(pre.reduced, {1.0, u, pre.lambda}, o);
    const auto lifted = lift_solution(red, pre.map, r);
    if (direct.status == SolveStatus::infeasible || lifted.status == SolveStatus::infeasible) {
      ++infeasible;
      bad += direct.status != lifted.status;
      continue;
    }
    if (direct.status != SolveStatus::optimal || lifted.status != SolveStatus::optimal ||
        direct.eta != lifted.eta) {
      ++bad;
      continue;
    }
    const double v = solution_violation(r, spec, lifted);
    worst_violation = std::max(worst_violation, v);
    bad += v > 1e-6;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && max_reduced <= 12 && secs < 300.0,
          fmt("%d instances (%d infeasible), raw m <= %zu, reduced m <= %zu, %d mismatches, "
              "worst lifted violation %.2g, %.1f s (budget 300 s)",
              n, infeasible, max_raw, max_reduced, bad, worst_violation, secs)};
}

// 3. The big-M constant dominates every attainable margin.
Verdict big_m_validity() {
  Rng rng(303);
  int bad = 0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const std::size_t t = 1 + rng.uniform_index(30);
    const double u = rng.bernoulli(0.5) ? (rng.bernoulli(0.5) ? 2.0 : 100.0) : 1.0 + 999.0 * rng.uniform01();
    const double ell = rng.bernoulli(0.2) ? u : 1.0 + (u - 1.0) * rng.uniform01();
    const double lo = std::min(ell, u);
    const double m_big = big_m(static_cast<double>(t), u);
    double act = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
      const double a = rng.bernoulli(0.3) ? (rng.bernoulli(0.5) ? lo : u) : lo + (u - lo) * rng.uniform01();
      act += (rng.bernoulli(0.5) ? 1.0 : -1.0) * a;
    }
    bad += !(std::abs(act) <= u * static_cast<double>(t) && u * static_cast<double>(t) < m_big);
  }
  return {bad == 0, fmt("%d draws, %d violations", n, bad)};
}

// 4. Relaxing the eta bound tenfold never changes the optimum.
Verdict eta_bound() {
  Rng rng(404);
  int n = 0, bad = 0, compared = 0;
  for (; n < 200; ++n) {
    const std::size_t t = 2 + rng.uniform_index(4);
    const std::size_t m = 1 + rng.uniform_index(10);
    const long lambda = static_cast<long>(rng.uniform_index(m + 1));
    const double u = rng.bernoulli(0.5) ? 2.0 : 100.0;
    const auto r = random_votes(rng, t, m);
    const auto model = build_milp(r, {1.0, u, lambda});
    auto loose = model;
    const auto eta = layout_of(r).eta();
    loose.variables[eta].ub = 10.0 * model.variables[eta].ub;
    const auto a = milp::solve_milp(model);
    const auto b = milp::solve_milp(loose);
    if (a.status != b.status) {
      ++bad;
      continue;
    }
    if (a.status != SolveStatus::optimal) continue;
    ++compared;
    const auto oa = integral(a.objective);
    const auto ob = integral(b.objective);
    bad += !oa || !ob || *oa != *ob;
  }
  return {bad == 0, fmt("%d instances, %d with optima, %d differences", n, compared, bad)};
}

// 5. Fixed points take their forced value in every optimal assignment.
Verdict fixing_soundness() {
  Rng rng(505);
  int n = 0, bad_z = 0, bad_order = 0;
  std::size_t fixed_total = 0, optima_checked = 0;
  for (; n < 200; ++n) {
    const std::size_t t = 2 + rng.uniform_index(4);
    const std::size_t m = 1 + rng.uniform_index(10);
    const double u = rng.bernoulli(0.5) ? 2.0 : 100.0;
    std::vector<std::vector<int>> rows(t, std::vector<int>(m));
    for (std::size_t i = 0; i < m; ++i) {
      // Mix near-unanimous columns in so that fixing has something to do.
      const double p = rng.bernoulli(0.4) ? (rng.bernoulli(0.5) ? 0.95 : 0.05) : 0.5;
      for (std::size_t j = 0; j < t; ++j) rows[j][i] = rng.bernoulli(p) ? 1 : -1;
    }
    const auto r = VoteMatrix::from_rows(rows);
    const long lambda = static_cast<long>(rng.uniform_index(m + 1));
    const auto fix = fix_variables(r, 1.0, u);
    for (std::size_t i = 0; i < m; ++i) bad_order += fix.phi[i] > fix.psi[i];
    fixed_total += fix.positive.size() + fix.negative.size();

    const auto best = brute_force_solve(r, lambda, 1.0, u);
    if (best.status != SolveStatus::optimal) continue;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      std::vector<int> z(m);
      long count = 0;
      for (std::size_t i = 0; i < m; ++i) {
        z[i] = (mask >> i) & 1;
        count += z[i];
      }
      if (std::abs(count - lambda) != static_cast<long>(best.eta)) continue;
      if (!alpha_feasible(r, z, 1.0, u)) continue;
      ++optima_checked;
      for (auto i : fix.positive) bad_z += z[i] != 1;
      for (auto i : fix.negative) bad_z += z[i] != 0;
    }
  }
  return {bad_z == 0 && bad_order == 0,
          fmt("%d instances, %zu fixed points, %zu optimal assignments checked, "
              "%d contradicted fixings, %d with phi > psi",
              n, fixed_total, optima_checked, bad_z, bad_order)};
}

// 6. Presolve plus priorities needs at most half the nodes and time.
Verdict presolve_speedup() {
  constexpr double kLimit = 20.0;
  std::vector<double> nodes_raw, nodes_p, time_raw, time_p, node_ratio, time_ratio;
  double min_dup = 1.0, min_fix = 1.0;
  int raw_limited = 0, p_unsolved = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SyntheticVotesOptions o;
    o.seed = 600 + s;
    const auto inst = make_synthetic_votes(o);
    const auto& r = inst.votes;
    min_dup = std::min(min_dup, duplicated_fraction(r));
    const auto fix = fix_variables(r, 1.0, 100.0);
    min_fix = std::min(min_fix, static_cast<double>(fix.positive.size() + fix.negative.size()) /
                                    static_cast<double>(r.num_points()));
    milp::BnbConfig bnb;
    bnb.time_limit = kLimit;
    const auto raw = solve_with_approach(Approach::c2rf, r, inst.lambda, 1.0, 100.0, bnb);
    const auto p = solve_with_approach(Approach::p_c2rf, r, inst.lambda, 1.0, 100.0, bnb);
    raw_limited += raw.solution.status != SolveStatus::optimal;
    p_unsolved += p.solution.status != SolveStatus::optimal;
    const auto& a = raw.solution.stats;
    const auto& b = p.solution.stats;
    nodes_raw.push_back(static_cast<double>(a.nodes));
    nodes_p.push_back(static_cast<double>(b.nodes));
    time_raw.push_back(a.seconds);
    time_p.push_back(b.seconds);
    node_ratio.push_back(static_cast<double>(b.nodes) / static_cast<double>(std::max<std::size_t>(1, a.nodes)));
    time_ratio.push_back(b.seconds / std::max(1e-9, a.seconds));
  }
  // Raw solves stopped by the limit understate their true cost, so the ratios
  // below are conservative for them.
  const double nodes_med = median(nodes_p) / median(nodes_raw);
  const double time_med = median(time_p) / median(time_raw);
  const double nr = median(node_ratio), tr = median(time_ratio);
  const bool pass = min_dup >= 0.6 && min_fix >= 0.25 && p_unsolved == 0 && nodes_med <= 0.5 &&
                    time_med <= 0.5 && nr <= 0.5 && tr <= 0.5;
  return {pass,
          fmt("20 instances (dup >= %.2f, fixable >= %.2f); median nodes %g vs %g (%.3f), "
              "median time %.3g s vs %.3g s (%.3f); per-instance median ratios nodes %.3f "
              "time %.3f; raw stopped at %g s limit on %d, reduced unsolved on %d",
              min_dup, min_fix, median(nodes_p), median(nodes_raw), nodes_med, median(time_p),
              median(time_raw), time_med, nr, tr, kLimit, raw_limited, p_unsolved)};
}

struct DeltaRun {
  std::vector<double> delta;
  int limited = 0;
  double secs = 0.0;
};

DeltaRun accuracy_deltas(SamplingMode mode, std::uint64_t base_seed) {
  const auto t0 = Clock::now();
  DeltaRun out;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RunConfig c;
    c.data.count = 2000;
    c.data.dims = 2;
    c.data.separation = 2.0;
    c.data.seed = base_seed + s;
    c.sampling.labeled_fraction = 0.01;
    c.sampling.mode = mode;
    c.sampling.p_pos = 0.85;
    c.seeds = {base_seed + s};
    c.forest.trees = 20;
    c.approaches = {Approach::rf, Approach::p_c2rf};
    c.time_limit = 60.0;
    const auto b = run_pipeline(c);
    const auto& rf = b.cells[0];
    const auto& p = b.cells[1];
    if (!rf.terminal() || !p.terminal()) {
      out.delta.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    out.limited += p.status != "optimal";
    out.delta.push_back(deltas(p.metrics, rf.metrics).accuracy);
  }
  out.secs = seconds_since(t0);
  return out;
}

// 7. Under biased sampling the cardinality model beats the majority vote.
Verdict biased_benefit() {
  const auto run = accuracy_deltas(SamplingMode::biased, 700);
  int positive = 0, broken = 0;
  for (double d : run.delta) {
    broken += std::isnan(d);
    positive += d > 0.0;
  }
  const double med = broken ? std::numeric_limits<double>::quiet_NaN() : median(run.delta);
  const double share = positive / 20.0;
  return {broken == 0 && med > 0.0 && share >= 0.6 && run.secs < 1800.0,
          fmt("median dAC %+.4f, dAC > 0 on %d/20 seeds (%.0f%%), %d stopped by the limit, "
              "%d failed, %.0f s (budget 1800 s)",
              med, positive, 100.0 * share, run.limited, broken, run.secs)};
}

// 8. Under simple random sampling the two stay close.
Verdict unbiased_neutrality() {
  const auto run = accuracy_deltas(SamplingMode::simple, 800);
  int broken = 0;
  std::vector<double> abs_delta;
  for (double d : run.delta) {
    broken += std::isnan(d);
    abs_delta.push_back(std::abs(d));
  }
  const double med = broken ? std::numeric_limits<double>::quiet_NaN() : median(abs_delta);
  const double signed_med = broken ? med : median(run.delta);
  return {broken == 0 && med <= 0.05,
          fmt("median |dAC| %.4f (median dAC %+.4f), %d stopped by the limit, %d failed, %.0f s",
              med, signed_med, run.limited, broken, run.secs)};
}

// 9. Metric examples and profile monotonicity.
Verdict metric_units() {
  int bad = 0;
  auto check = [&](bool ok) { bad += !ok; };
  const std::vector<int> t1{1, -1};
  const std::vector<int> flipped{-1, 1};
  check(confusion(t1, t1) == Confusion{1, 1, 0, 0});
  const auto c2 = confusion(flipped, t1);
  check(c2.tp == 0 && c2.tn == 0);
  check(confusion(std::vector<int>{1, 1, -1, -1}, std::vector<int>{1, -1, 1, -1}) ==
        Confusion{1, 1, 1, 1});
  check(accuracy({3, 2, 0, 0}) == 1.0);
  check(accuracy({0, 0, 2, 3}) == 0.0);
  check(accuracy({1, 1, 1, 1}) == 0.5);
  check(mcc({5, 5, 0, 0}) == 1.0);
  check(mcc({0, 0, 5, 5}) == -1.0);
  check(mcc({5, 0, 5, 0}) == 0.0);
  check(deltas({0.8, 0.3}, {0.8, 0.3}).accuracy == 0.0 && deltas({0.8, 0.3}, {0.8, 0.3}).mcc == 0.0);
  check(std::abs(deltas({0.75, 0}, {0.70, 0}).accuracy - 0.05) < 1e-12);
  const auto e = ecdf(std::vector<double>{1, 10, 8000}, 7200);
  check(e(100) == 2.0 / 3.0 && e(std::numeric_limits<double>::infinity()) == 2.0 / 3.0);
  const auto none = ecdf(std::vector<double>{8000, 9000}, 7200);
  check(none.steps.empty() && none(1e12) == 0.0);
  const auto one = ecdf(std::vector<double>{4, 4, 4}, 7200);
  check(one.steps.size() == 1 && one.steps[0] == std::pair<double, double>{4.0, 1.0});
  const int examples_bad = bad;

  Rng rng(909);
  int mono_bad = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> times(1 + rng.uniform_index(50));
    for (auto& t : times) t = rng.bernoulli(0.1) ? 5.0 : 100.0 * rng.uniform01();
    const double limit = 100.0 * rng.uniform01();
    const auto g = ecdf(times, limit);
    double prev = 0.0;
    for (double s = 0.0; s <= 120.0; s += 0.5) {
      const double v = g(s);
      mono_bad += v < prev || v > g.solved_fraction();
      prev = v;
    }
  }
  return {examples_bad == 0 && mono_bad == 0,
          fmt("%d example failures, 1000 random profiles with %d monotonicity violations",
              examples_bad, mono_bad)};
}

milp::MilpModel random_model(Rng& rng) {
  milp::MilpModel m;
  m.name = "rand";
  const std::size_t n = 1 + rng.uniform_index(12);
  for (std::size_t j = 0; j < n; ++j) {
    const int kind = static_cast<int>(rng.uniform_index(5));
    double lb = std::round(rng.uniform01() * 20.0 - 10.0) / 4.0;
    double ub = lb + std::round(rng.uniform01() * 40.0) / 8.0;
    bool integer = false;
    if (kind == 0) lb = -milp::kInf;
    if (kind == 1) ub = milp::kInf;
    if (kind == 2) {
      integer = true;
      lb = 0.0;
      ub = 1.0;
    }
    if (kind == 3) {
      integer = true;
      lb = std::round(lb);
      ub = lb + static_cast<double>(rng.uniform_index(6));
    }
    const double cost = rng.bernoulli(0.5) ? 0.0 : std::round(rng.uniform01() * 200.0 - 100.0) / 8.0;
    m.add_variable("x" + std::to_string(j), lb, ub, integer, cost);
  }
  const std::size_t rows = rng.uniform_index(10);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<milp::Entry> e;
    for (std::size_t j = 0; j < n; ++j)
      if (rng.bernoulli(0.5)) e.push_back({j, std::round(rng.uniform01() * 64.0 - 32.0) / 4.0 + 0.125});
    double lb = std::round(rng.uniform01() * 40.0 - 20.0) / 2.0;
    double ub = lb + std::round(rng.uniform01() * 20.0) / 2.0;
    switch (rng.uniform_index(4)) {
      case 0: lb = -milp::kInf; break;
      case 1: ub = milp::kInf; break;
      case 2: ub = lb; break;
      default: break;
    }
    m.add_constraint("r" + std::to_string(r), std::move(e), lb, ub);
  }
  return m;
}

// 10. MPS export followed by import reproduces the model.
Verdict mps_round_trip() {
  Rng rng(1010);
  int bad = 0;
  const int n = 100;
  for (int k = 0; k < n; ++k) {
    milp::MilpModel m;
    if (k % 2 == 0) {
      const std::size_t t = 1 + rng.uniform_index(6);
      const std::size_t pts = 1 + rng.uniform_index(12);
      m = build_milp(random_votes(rng, t, pts),
                     {1.0, 100.0, static_cast<long>(rng.uniform_index(pts + 1))});
    } else {
      m = random_model(rng);
    }
    const auto back = milp::from_mps(milp::to_mps(m));
    bad += !milp::structurally_equal(m, back);
  }
  return {bad == 0, fmt("%d models (half built from vote matrices), %d mismatches; external "
                        "solver cross-check skipped (none installed)",
                        n, bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"presolve equivalence", presolve_equivalence},
      {"big-M validity", big_m_validity},
      {"eta bound does not cut optima", eta_bound},
      {"fixing soundness", fixing_soundness},
      {"presolve speedup", presolve_speedup},
      {"biased-sample benefit", biased_benefit},
      {"unbiased-sample neutrality", unbiased_neutrality},
      {"metric and ECDF units", metric_units},
      {"MPS round trip", mps_round_trip},
  };
  std::set<int> wanted;
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], criteria.size());
      return 64;
    }
    wanted.insert(k);
  }
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!wanted.empty() && !wanted.count(static_cast<int>(k + 1))) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %zu (%s): %s - %s\n", k + 1, criteria[k].first, v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
