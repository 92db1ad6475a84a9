#pragma once

// Labeled binary datasets: CSV ingestion, coordinate scaling, and drawing the
// labeled/unlabeled split with its positive-class count lambda.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "c2rf/rng.hpp"

namespace c2rf {

/// Points are stored row-major: point i occupies values[i*dims, (i+1)*dims).
struct Dataset {
  std::size_t dims = 0;
  std::vector<double> values;
  std::vector<int> labels;          // each -1 or +1
  std::vector<std::size_t> ids;     // stable record identifiers
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  std::span<const double> point(std::size_t i) const {
    return {values.data() + i * dims, dims};
  }
  std::span<double> point(std::size_t i) { return {values.data() + i * dims, dims}; }
  double at(std::size_t i, std::size_t j) const { return values[i * dims + j]; }
};

inline void check_invariants(const Dataset& d) {
  if (d.dims < 1) throw std::invalid_argument("dataset needs at least one feature");
  if (d.size() < 2) throw std::invalid_argument("dataset needs at least two points");
  if (d.values.size() != d.size() * d.dims || d.ids.size() != d.size())
    throw std::invalid_argument("dataset arrays have inconsistent sizes");
  for (int y : d.labels)
    if (y != -1 && y != 1) throw std::invalid_argument("labels must be -1 or +1");
  for (double v : d.values)
    if (!std::isfinite(v)) throw std::invalid_argument("dataset contains a non-finite value");
}

struct CsvOptions {
  std::string label_column;
  char delimiter = ',';
  /// Class value mapped to +1; every other class maps to -1.
  std::string positive_label = "1";
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_csv_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool is_missing(const std::string& s) {
  static const std::set<std::string> tokens = {"",    "NA",  "N/A",  "na",  "?",
                                               "nan", "NaN", "null", "NULL", "None"};
  return tokens.count(s) > 0;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

/// Class values compare numerically when both parse as numbers ("1" == "+1" == "1.0").
inline bool same_class(const std::string& a, const std::string& b) {
  double x = 0.0;
  double y = 0.0;
  if (parse_double(a, x) && parse_double(b, y)) return x == y;
  return a == b;
}

}  // namespace detail

/// Reads a CSV with a header row. Rows with missing fields are dropped first,
/// then exact duplicate rows; three classes collapse to positive-vs-rest.
inline Dataset read_csv(std::istream& in, const CsvOptions& opts) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("CSV is empty");
  const auto header = detail::split_csv_line(line, opts.delimiter);
  const auto label_it = std::find(header.begin(), header.end(), opts.label_column);
  if (label_it == header.end())
    throw CsvError("label column '" + opts.label_column + "' not found in header");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  Dataset d;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) d.feature_names.push_back(header[c]);
  d.dims = d.feature_names.size();
  if (d.dims < 1) throw CsvError("CSV has no feature columns");

  std::vector<std::string> raw_labels;
  std::vector<double> row(d.dims);
  std::size_t line_no = 1;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line, opts.delimiter);
    const std::size_t this_record = record++;
    if (fields.size() != header.size())
      throw CsvError("line " + std::to_string(line_no) + ": expected " +
                     std::to_string(header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    bool missing = false;
    std::size_t k = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (detail::is_missing(fields[c])) {
        missing = true;
        break;
      }
      if (c == label_col) continue;
      if (!detail::parse_double(fields[c], row[k++]))
        throw CsvError("line " + std::to_string(line_no) + ": non-numeric value '" + fields[c] +
                       "' in column '" + header[c] + "'");
    }
    if (missing) continue;
    d.values.insert(d.values.end(), row.begin(), row.end());
    raw_labels.push_back(fields[label_col]);
    d.ids.push_back(this_record);
  }

  std::vector<std::string> classes;
  for (const auto& l : raw_labels)
    if (std::none_of(classes.begin(), classes.end(),
                     [&](const std::string& c) { return detail::same_class(c, l); }))
      classes.push_back(l);
  if (classes.size() > 3)
    throw CsvError("label column has " + std::to_string(classes.size()) +
                   " classes; at most three are supported");
  if (classes.size() < 2) throw CsvError("label column needs at least two classes");
  if (std::none_of(classes.begin(), classes.end(),
                   [&](const std::string& c) { return detail::same_class(c, opts.positive_label); }))
    throw CsvError("positive label '" + opts.positive_label + "' does not occur");
  for (const auto& l : raw_labels)
    d.labels.push_back(detail::same_class(l, opts.positive_label) ? 1 : -1);

  // Drop exact duplicates (features and label), keeping the first occurrence.
  std::set<std::pair<std::vector<double>, int>> seen;
  Dataset out;
  out.dims = d.dims;
  out.feature_names = d.feature_names;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto p = d.point(i);
    if (!seen.emplace(std::vector<double>(p.begin(), p.end()), d.labels[i]).second) continue;
    out.values.insert(out.values.end(), p.begin(), p.end());
    out.labels.push_back(d.labels[i]);
    out.ids.push_back(d.ids[i]);
  }
  if (out.size() < 2) throw CsvError("fewer than two rows remain after cleaning");
  return out;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot read '" + path + "'");
  return read_csv(in, opts);
}

inline constexpr double kScaleLimit = 100.0;

/// Centers each coordinate on the midpoint of its range; a coordinate whose
/// centered range still exceeds [-100, 100] is mapped affinely onto it.
inline Dataset scale(Dataset d) {
  const std::size_t n = d.size();
  for (std::size_t j = 0; j < d.dims; ++j) {
    double lo = d.at(0, j);
    double hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, d.at(i, j));
      hi = std::max(hi, d.at(i, j));
    }
    double mid = 0.5 * (lo + hi);
    // Already centered up to rounding of a previous pass.
    if (std::abs(mid) <= 1e-12 * std::max(std::abs(lo), std::abs(hi))) mid = 0.0;
    const double lo_c = lo - mid;
    const double hi_c = hi - mid;
    const bool rescale = lo_c < -kScaleLimit || hi_c > kScaleLimit;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = d.values[i * d.dims + j];
      const double shifted = v - mid;
      v = rescale ? 2.0 * kScaleLimit * ((shifted - lo_c) / (hi_c - lo_c)) - kScaleLimit
                  : shifted;
    }
  }
  return d;
}

enum class SamplingMode { simple, biased };

struct SampleOptions {
  double labeled_fraction = 0.01;
  SamplingMode mode = SamplingMode::biased;
  double p_pos = 0.85;
  std::uint64_t seed = 0;
};

struct SplitDataset {
  std::vector<std::size_t> labeled;     // indices into the dataset, ascending
  std::vector<int> labeled_labels;
  std::vector<std::size_t> unlabeled;   // ascending
  std::vector<int> unlabeled_truth;     // evaluation only
  std::size_t lambda = 0;               // positives among the unlabeled points

  std::size_t n() const { return labeled.size(); }
  std::size_t m() const { return unlabeled.size(); }
};

/// Draws n = round(fraction * N) labeled points. Simple mode: uniform subset.
/// Biased mode: each slot picks the positive class with probability p_pos
/// (the other class when one is exhausted) and then a uniform member of it.
inline SplitDataset draw_sample(const Dataset& d, const SampleOptions& opts) {
  const std::size_t total = d.size();
  if (!(opts.labeled_fraction > 0.0 && opts.labeled_fraction < 1.0))
    throw std::invalid_argument("labeled fraction must lie in (0, 1)");
  if (opts.mode == SamplingMode::biased && !(opts.p_pos > 0.0 && opts.p_pos < 1.0))
    throw std::invalid_argument("p_pos must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(std::llround(opts.labeled_fraction * total));
  if (n >= total) throw std::invalid_argument("labeled sample would contain every point");
  if (n == 0) throw std::invalid_argument("labeled sample would be empty");

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < total; ++i) (d.labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) throw std::invalid_argument("a class is empty");

  Rng rng(opts.seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(n);
  if (opts.mode == SamplingMode::simple) {
    std::vector<std::size_t> all(total);
    for (std::size_t i = 0; i < total; ++i) all[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = k + rng.uniform_index(total - k);
      std::swap(all[k], all[r]);
      chosen.push_back(all[k]);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const bool want_pos = rng.bernoulli(opts.p_pos);
      auto& pool = (want_pos ? !pos.empty() : neg.empty()) ? pos : neg;
      const std::size_t r = rng.uniform_index(pool.size());
      chosen.push_back(pool[r]);
      pool[r] = pool.back();
      pool.pop_back();
    }
  }
  std::sort(chosen.begin(), chosen.end());

  SplitDataset s;
  std::vector<bool> is_labeled(total, false);
  for (auto i : chosen) {
    is_labeled[i] = true;
    s.labeled.push_back(i);
    s.labeled_labels.push_back(d.labels[i]);
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (is_labeled[i]) continue;
    s.unlabeled.push_back(i);
    s.unlabeled_truth.push_back(d.labels[i]);
    if (d.labels[i] > 0) ++s.lambda;
  }
  return s;
}

/// Two isotropic unit-variance Gaussians whose means are `separation` apart
/// along the diagonal. Exactly round(positive_fraction * N) positives.
inline Dataset make_two_gaussians(std::size_t count, std::size_t dims, double separation,
                                  double positive_fraction, std::uint64_t seed) {
  if (count < 2 || dims < 1) throw std::invalid_argument("two_gaussians: degenerate size");
  Rng rng(seed);
  const auto n_pos = static_cast<std::size_t>(std::llround(positive_fraction * count));
  std::vector<int> labels(count, -1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  for (std::size_t k = count - 1; k > 0; --k) std::swap(labels[k], labels[rng.uniform_index(k + 1)]);
  Dataset d;
  d.dims = dims;
  d.labels = labels;
  const double offset = 0.5 * separation / std::sqrt(static_cast<double>(dims));
  for (std::size_t i = 0; i < count; ++i) {
    d.ids.push_back(i);
    for (std::size_t j = 0; j < dims; ++j) d.values.push_back(labels[i] * offset + rng.normal());
  }
  for (std::size_t j = 0; j < dims; ++j) d.feature_names.push_back("x" + std::to_string(j));
  return d;
}

// JSON containers ---------------------------------------------------------

inline constexpr int kFormatVersion = 1;

inline nlohmann::json to_json(const Dataset& d) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto p = d.point(i);
    features.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"format", "c2rf-dataset"}, {"version", kFormatVersion},
          {"feature_names", d.feature_names}, {"ids", d.ids},
          {"labels", d.labels}, {"features", features}};
}

inline void expect_format(const nlohmann::json& j, const std::string& format) {
  if (!j.is_object() || j.value("format", "") != format)
    throw std::runtime_error("expected a '" + format + "' document");
  if (j.value("version", 0) != kFormatVersion)
    throw std::runtime_error("unsupported '" + format + "' version");
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-dataset");
  Dataset d;
  d.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  d.ids = j.at("ids").get<std::vector<std::size_t>>();
  d.labels = j.at("labels").get<std::vector<int>>();
  d.dims = d.feature_names.size();
  for (const auto& row : j.at("features")) {
    if (row.size() != d.dims) throw std::runtime_error("feature row has wrong length");
    for (const auto& v : row) d.values.push_back(v.get<double>());
  }
  check_invariants(d);
  return d;
}

inline nlohmann::json to_json(const SplitDataset& s) {
  return {{"format", "c2rf-split"},       {"version", kFormatVersion},
          {"labeled", s.labeled},         {"labeled_labels", s.labeled_labels},
          {"unlabeled", s.unlabeled},     {"unlabeled_truth", s.unlabeled_truth},
          {"lambda", s.lambda}};
}

inline SplitDataset split_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-split");
  SplitDataset s;
  s.labeled = j.at("labeled").get<std::vector<std::size_t>>();
  s.labeled_labels = j.at("labeled_labels").get<std::vector<int>>();
  s.unlabeled = j.at("unlabeled").get<std::vector<std::size_t>>();
  s.unlabeled_truth = j.at("unlabeled_truth").get<std::vector<int>>();
  s.lambda = j.at("lambda").get<std::size_t>();
  if (s.labeled.size() != s.labeled_labels.size() || s.unlabeled.size() != s.unlabeled_truth.size())
    throw std::runtime_error("split arrays have inconsistent sizes");
  return s;
}

}  // namespace c2rf
