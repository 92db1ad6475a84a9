#pragma once

// Structured vote matrices for solver benchmarks: a block of unanimous
// columns plus repeated copies of a few random base columns.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "c2rf/forest.hpp"
#include "c2rf/rng.hpp"

namespace c2rf {

struct SyntheticVotesOptions {
  std::size_t trees = 20;
  std::size_t points = 500;
  double unanimous_fraction = 0.25;
  double mean_copies = 4.0;  // average multiplicity of a base column
  double ell = 1.0;
  double u = 100.0;
  std::uint64_t seed = 0;
};

struct SyntheticVotes {
  VoteMatrix votes;
  long lambda = 0;
  std::vector<double> hidden_alpha;  // weights that produced lambda
};

/// lambda counts the points a random alpha in [ell, u]^t classifies positive.
inline SyntheticVotes make_synthetic_votes(const SyntheticVotesOptions& o) {
  if (o.trees < 1 || o.points < 1) throw std::invalid_argument("synthetic votes: empty shape");
  if (!(o.unanimous_fraction >= 0.0 && o.unanimous_fraction <= 1.0))
    throw std::invalid_argument("unanimous fraction must lie in [0, 1]");
  if (!(o.mean_copies >= 1.0)) throw std::invalid_argument("mean copies must be at least 1");
  if (!(o.ell < o.u)) throw std::invalid_argument("need ell < u");
  Rng rng(o.seed);
  const std::size_t t = o.trees;
  const std::size_t m = o.points;

  std::vector<double> alpha(t);
  for (auto& a : alpha) a = o.ell + (o.u - o.ell) * rng.uniform01();

  const auto n_unan = std::min<std::size_t>(
      m, static_cast<std::size_t>(std::ceil(o.unanimous_fraction * static_cast<double>(m))));
  const std::size_t n_rest = m - n_unan;
  const std::size_t bases =
      n_rest ? std::max<std::size_t>(1, static_cast<std::size_t>(n_rest / o.mean_copies)) : 0;
  std::vector<std::vector<int>> base(bases, std::vector<int>(t));
  for (auto& c : base)
    for (auto& v : c) v = rng.bernoulli(0.5) ? 1 : -1;

  std::vector<std::vector<int>> cols;
  cols.reserve(m);
  for (std::size_t k = 0; k < n_rest; ++k)
    cols.push_back(base[k < bases ? k : rng.uniform_index(bases)]);
  for (std::size_t k = 0; k < n_unan; ++k)
    cols.emplace_back(t, rng.bernoulli(0.5) ? 1 : -1);
  for (std::size_t k = m - 1; k > 0; --k) std::swap(cols[k], cols[rng.uniform_index(k + 1)]);

  SyntheticVotes out;
  for (const auto& c : cols) {
    double a = 0.0;
    for (std::size_t j = 0; j < t; ++j) a += alpha[j] * c[j];
    out.lambda += a >= 1.0;
  }
  std::vector<std::vector<int>> rows(t, std::vector<int>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < t; ++j) rows[j][i] = cols[i][j];
  out.votes = VoteMatrix::from_rows(rows);
  out.hidden_alpha = std::move(alpha);
  return out;
}

/// Share of points whose vote column occurs more than once.
inline double duplicated_fraction(const VoteMatrix& r) {
  std::map<std::vector<signed char>, std::size_t> count;
  for (std::size_t i = 0; i < r.num_points(); ++i) ++count[r.column(i)];
  std::size_t dup = 0;
  for (const auto& [col, c] : count)
    if (c > 1) dup += c;
  return r.num_points() ? static_cast<double>(dup) / static_cast<double>(r.num_points()) : 0.0;
}

/// Share of points every tree votes the same way on.
inline double unanimous_fraction(const VoteMatrix& r) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < r.num_points(); ++i) {
    bool same = true;
    for (std::size_t j = 1; j < r.num_trees() && same; ++j) same = r.vote(j, i) == r.vote(0, i);
    n += same;
  }
  return r.num_points() ? static_cast<double>(n) / static_cast<double>(r.num_points()) : 0.0;
}

}  // namespace c2rf
