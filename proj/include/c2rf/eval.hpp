#pragma once

// Classification metrics and solve-time profiles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace c2rf {

struct Confusion {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;

  long total() const { return tp + tn + fp + fn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("confusion: length mismatch");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] > 0;
    const bool t = truth[i] > 0;
    if (p && t)
      ++c.tp;
    else if (!p && !t)
      ++c.tn;
    else if (p)
      ++c.fp;
    else
      ++c.fn;
  }
  return c;
}

inline double accuracy(const Confusion& c) {
  if (c.total() <= 0) throw std::invalid_argument("accuracy of an empty confusion matrix");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Matthews correlation; 0 when a marginal is empty.
inline double mcc(const Confusion& c) {
  if (c.total() <= 0) throw std::invalid_argument("mcc of an empty confusion matrix");
  const double a = static_cast<double>(c.tp + c.fp);
  const double b = static_cast<double>(c.tp + c.fn);
  const double d = static_cast<double>(c.tn + c.fp);
  const double e = static_cast<double>(c.tn + c.fn);
  if (a == 0 || b == 0 || d == 0 || e == 0) return 0.0;
  const double num = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                     static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return std::clamp(num / std::sqrt(a * b * d * e), -1.0, 1.0);
}

/// MCC mapped onto [0, 100] for display next to percentage accuracies.
inline double mcc_percent(double m) { return (m + 1.0) / 2.0 * 100.0; }

struct Metrics {
  double accuracy = 0.0;
  double mcc = 0.0;
};

inline Metrics metrics(std::span<const int> predicted, std::span<const int> truth) {
  const auto c = confusion(predicted, truth);
  return {accuracy(c), mcc(c)};
}

struct MetricDeltas {
  double accuracy = 0.0;
  double mcc = 0.0;
};

/// Positive means `a` did better than `b`.
inline MetricDeltas deltas(const Metrics& a, const Metrics& b) {
  return {a.accuracy - b.accuracy, a.mcc - b.mcc};
}

/// Step function gamma(s) = |{p : t_p <= s and t_p <= limit}| / |P|.
struct Ecdf {
  /// (sigma, gamma) at every jump, sigma ascending, gamma strictly increasing.
  std::vector<std::pair<double, double>> steps;
  std::size_t problems = 0;

  double operator()(double sigma) const {
    double g = 0.0;
    for (const auto& [s, v] : steps) {
      if (s > sigma) break;
      g = v;
    }
    return g;
  }
  double solved_fraction() const { return steps.empty() ? 0.0 : steps.back().second; }
};

inline Ecdf ecdf(std::span<const double> times, double limit) {
  if (times.empty()) throw std::invalid_argument("ecdf of an empty problem set");
  std::vector<double> solved;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("ecdf: times must be nonnegative");
    if (t <= limit) solved.push_back(t);
  }
  std::sort(solved.begin(), solved.end());
  Ecdf e;
  e.problems = times.size();
  const double n = static_cast<double>(times.size());
  for (std::size_t k = 0; k < solved.size(); ++k) {
    if (k + 1 < solved.size() && solved[k + 1] == solved[k]) continue;
    e.steps.emplace_back(solved[k], static_cast<double>(k + 1) / n);
  }
  return e;
}

/// Median of the values; mean of the middle pair for even counts.
inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace c2rf
