#pragma once

// MPS export/import for MilpModel.
//
// Output follows the fixed-format column layout (field starts at columns 2, 5,
// 15 and 25; one coefficient per line). Numbers use the shortest decimal form
// that round-trips a double exactly. Names longer than eight characters or
// numbers longer than twelve overflow their field; the reader splits on
// whitespace, so such files still re-import exactly, but names must not
// contain blanks. See docs/formats.md for the full layout.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "c2rf/milp_model.hpp"

namespace c2rf::milp {

class MpsParseError : public std::runtime_error {
 public:
  MpsParseError(std::size_t line, const std::string& what)
      : std::runtime_error("MPS line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), ptr);
}

inline std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

/// "    <f2>  <f3>  <f4>" with fixed-format field positions.
inline std::string data_line(std::string_view f2, std::string_view f3, std::string_view f4) {
  return "    " + pad(f2, 8) + "  " + pad(f3, 8) + "  " + std::string(f4);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_number(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept tokens from_chars rejects, e.g. a leading '+'.
    try {
      std::size_t used = 0;
      v = std::stod(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw MpsParseError(line, "invalid number '" + std::string(s) + "'");
    }
  }
  return v;
}

}  // namespace detail

/// Serializes `model` to MPS text.
inline std::string to_mps(const MilpModel& model) {
  using detail::data_line;
  using detail::format_number;
  std::ostringstream out;
  out << "NAME          " << model.name << '\n';
  out << "ROWS\n";
  out << " N  obj\n";
  const std::size_t rows = model.num_rows();
  // Per-row representation: type, rhs, optional range.
  std::vector<char> type(rows);
  std::vector<double> rhs(rows, 0.0);
  std::vector<double> range(rows, 0.0);
  std::vector<bool> has_range(rows, false);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& c = model.constraints[r];
    const bool lo = std::isfinite(c.lb);
    const bool hi = std::isfinite(c.ub);
    if (lo && hi && c.lb == c.ub) {
      type[r] = 'E';
      rhs[r] = c.lb;
    } else if (lo && hi) {
      has_range[r] = true;
      range[r] = c.ub - c.lb;
      if (c.lb + range[r] == c.ub || c.ub - range[r] != c.lb) {
        type[r] = 'G';
        rhs[r] = c.lb;
      } else {
        type[r] = 'L';
        rhs[r] = c.ub;
      }
    } else if (lo) {
      type[r] = 'G';
      rhs[r] = c.lb;
    } else if (hi) {
      type[r] = 'L';
      rhs[r] = c.ub;
    } else {
      type[r] = 'N';
    }
    out << ' ' << type[r] << "  " << c.name << '\n';
  }

  // Column-major view of the rows.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(model.num_vars());
  for (std::size_t r = 0; r < rows; ++r)
    for (const auto& e : model.constraints[r].entries) cols[e.var].emplace_back(r, e.coef);

  out << "COLUMNS\n";
  bool in_int = false;
  std::size_t marker = 0;
  for (std::size_t j = 0; j < model.num_vars(); ++j) {
    const auto& v = model.variables[j];
    if (v.integer != in_int) {
      out << "    " << detail::pad("M" + std::to_string(marker++), 8)
          << "  'MARKER'                 " << (v.integer ? "'INTORG'" : "'INTEND'") << '\n';
      in_int = v.integer;
    }
    if (model.objective[j] != 0.0 || cols[j].empty())
      out << data_line(v.name, "obj", format_number(model.objective[j])) << '\n';
    for (const auto& [r, coef] : cols[j])
      out << data_line(v.name, model.constraints[r].name, format_number(coef)) << '\n';
  }
  if (in_int)
    out << "    " << detail::pad("M" + std::to_string(marker++), 8)
        << "  'MARKER'                 'INTEND'\n";

  out << "RHS\n";
  for (std::size_t r = 0; r < rows; ++r)
    if (type[r] != 'N' && rhs[r] != 0.0)
      out << data_line("RHS", model.constraints[r].name, format_number(rhs[r])) << '\n';

  if (std::find(has_range.begin(), has_range.end(), true) != has_range.end()) {
    out << "RANGES\n";
    for (std::size_t r = 0; r < rows; ++r)
      if (has_range[r])
        out << data_line("RNG", model.constraints[r].name, format_number(range[r])) << '\n';
  }

  out << "BOUNDS\n";
  for (const auto& v : model.variables) {
    auto bound = [&](const char* kind, std::string_view value) {
      out << ' ' << kind << ' ' << detail::pad("BND", 8) << "  ";
      if (value.empty())
        out << v.name;
      else
        out << detail::pad(v.name, 8) << "  " << value;
      out << '\n';
    };
    if (v.integer && v.lb == 0.0 && v.ub == 1.0) {
      bound("BV", "");
    } else if (v.lb == v.ub) {
      bound("FX", format_number(v.lb));
    } else if (v.lb == -kInf && v.ub == kInf) {
      bound("FR", "");
    } else {
      if (v.lb == -kInf)
        bound("MI", "");
      else if (v.lb != 0.0)
        bound("LO", format_number(v.lb));
      if (v.ub != kInf) bound("UP", format_number(v.ub));
    }
  }
  out << "ENDATA\n";
  return out.str();
}

/// Parses MPS text. Inverse of to_mps on its own output; best-effort for
/// other free or fixed MPS files.
inline MilpModel from_mps(std::string_view text) {
  MilpModel model;
  model.name.clear();
  enum class Section { none, name, rows, columns, rhs, ranges, bounds, objsense, done };
  Section section = Section::none;
  std::string objective_row;
  bool maximize = false;
  std::unordered_map<std::string, std::size_t> row_index;
  std::unordered_map<std::string, std::size_t> col_index;
  std::vector<char> row_type;
  std::vector<double> rhs;
  std::vector<double> range;
  std::vector<bool> has_range;
  std::vector<bool> lb_set;
  bool in_int = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size() && section != Section::done) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '*') {
      if (pos > text.size()) break;
      continue;
    }
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (line.front() != ' ' && line.front() != '\t') {
      const std::string_view head = tok[0];
      if (head == "NAME") {
        section = Section::name;
        if (tok.size() > 1) model.name = std::string(tok[1]);
      } else if (head == "ROWS") {
        section = Section::rows;
      } else if (head == "COLUMNS") {
        section = Section::columns;
      } else if (head == "RHS") {
        section = Section::rhs;
      } else if (head == "RANGES") {
        section = Section::ranges;
      } else if (head == "BOUNDS") {
        section = Section::bounds;
      } else if (head == "OBJSENSE") {
        section = Section::objsense;
        if (tok.size() > 1) maximize = tok[1] == "MAX" || tok[1] == "MAXIMIZE";
      } else if (head == "ENDATA") {
        section = Section::done;
      } else {
        throw MpsParseError(line_no, "unknown section '" + std::string(head) + "'");
      }
      continue;
    }
    switch (section) {
      case Section::objsense:
        maximize = tok[0] == "MAX" || tok[0] == "MAXIMIZE";
        break;
      case Section::rows: {
        if (tok.size() < 2) throw MpsParseError(line_no, "row needs a type and a name");
        const char t = tok[0].size() == 1 ? tok[0][0] : '?';
        if (t != 'N' && t != 'E' && t != 'L' && t != 'G')
          throw MpsParseError(line_no, "unknown row type '" + std::string(tok[0]) + "'");
        if (t == 'N' && objective_row.empty()) {
          objective_row = std::string(tok[1]);
          break;
        }
        const std::string name(tok[1]);
        if (row_index.count(name) || name == objective_row)
          throw MpsParseError(line_no, "duplicate row '" + name + "'");
        row_index[name] = model.constraints.size();
        Constraint c;
        c.name = name;
        model.constraints.push_back(std::move(c));
        row_type.push_back(t);
        rhs.push_back(0.0);
        range.push_back(0.0);
        has_range.push_back(false);
        break;
      }
      case Section::columns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'")
            in_int = true;
          else if (tok[2] == "'INTEND'")
            in_int = false;
          else
            throw MpsParseError(line_no, "unknown marker");
          break;
        }
        if (tok.size() != 3 && tok.size() != 5)
          throw MpsParseError(line_no, "COLUMNS line needs 3 or 5 fields");
        const std::string col(tok[0]);
        auto it = col_index.find(col);
        if (it == col_index.end()) {
          it = col_index.emplace(col, model.add_variable(col, 0.0, kInf, in_int)).first;
          lb_set.push_back(false);
        }
        const std::size_t j = it->second;
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const std::string row(tok[k]);
          const double v = detail::parse_number(tok[k + 1], line_no);
          if (row == objective_row) {
            model.objective[j] = v;
            continue;
          }
          auto r = row_index.find(row);
          if (r == row_index.end()) throw MpsParseError(line_no, "unknown row '" + row + "'");
          model.constraints[r->second].entries.push_back({j, v});
        }
        break;
      }
      case Section::rhs:
      case Section::ranges: {
        const std::size_t first = tok.size() % 2 == 1 ? 1 : 0;
        if (tok.size() < 2 || tok.size() > 5)
          throw MpsParseError(line_no, "malformed RHS/RANGES line");
        for (std::size_t k = first; k + 1 < tok.size(); k += 2) {
          const std::string row(tok[k]);
          const double v = detail::parse_number(tok[k + 1], line_no);
          if (row == objective_row) continue;
          auto r = row_index.find(row);
          if (r == row_index.end()) throw MpsParseError(line_no, "unknown row '" + row + "'");
          if (section == Section::rhs) {
            rhs[r->second] = v;
          } else {
            range[r->second] = v;
            has_range[r->second] = true;
          }
        }
        break;
      }
      case Section::bounds: {
        const std::string kind(tok[0]);
        const bool valueless = kind == "FR" || kind == "MI" || kind == "PL" || kind == "BV";
        std::string_view col;
        std::string_view value;
        if (valueless) {
          if (tok.size() == 2) col = tok[1];
          else if (tok.size() >= 3) col = tok[2];
          if (tok.size() == 4) value = tok[3];
        } else if (tok.size() == 4) {
          col = tok[2];
          value = tok[3];
        } else if (tok.size() == 3) {
          col = tok[1];
          value = tok[2];
        }
        if (col.empty() || (!valueless && value.empty()))
          throw MpsParseError(line_no, "malformed BOUNDS line");
        auto it = col_index.find(std::string(col));
        if (it == col_index.end())
          throw MpsParseError(line_no, "unknown column '" + std::string(col) + "'");
        auto& v = model.variables[it->second];
        const double x = value.empty() ? 0.0 : detail::parse_number(value, line_no);
        if (kind == "UP" || kind == "UI") {
          v.ub = x;
          if (x < 0.0 && !lb_set[it->second] && v.lb == 0.0) v.lb = -kInf;
          if (kind == "UI") v.integer = true;
        } else if (kind == "LO" || kind == "LI") {
          v.lb = x;
          lb_set[it->second] = true;
          if (kind == "LI") v.integer = true;
        } else if (kind == "FX") {
          v.lb = v.ub = x;
          lb_set[it->second] = true;
        } else if (kind == "FR") {
          v.lb = -kInf;
          v.ub = kInf;
        } else if (kind == "MI") {
          v.lb = -kInf;
          lb_set[it->second] = true;
        } else if (kind == "PL") {
          v.ub = kInf;
        } else if (kind == "BV") {
          v.lb = 0.0;
          v.ub = 1.0;
          v.integer = true;
        } else {
          throw MpsParseError(line_no, "unknown bound type '" + kind + "'");
        }
        break;
      }
      default:
        throw MpsParseError(line_no, "data line outside a section");
    }
    if (pos > text.size()) break;
  }
  if (section != Section::done) throw MpsParseError(line_no, "missing ENDATA");

  for (std::size_t r = 0; r < model.constraints.size(); ++r) {
    auto& c = model.constraints[r];
    const double b = rhs[r];
    const double R = range[r];
    switch (row_type[r]) {
      case 'N': c.lb = -kInf; c.ub = kInf; break;
      case 'E':
        c.lb = c.ub = b;
        if (has_range[r]) {
          if (R > 0) c.ub = b + R;
          else c.lb = b + R;
        }
        break;
      case 'L':
        c.lb = has_range[r] ? b - std::abs(R) : -kInf;
        c.ub = b;
        break;
      case 'G':
        c.lb = b;
        c.ub = has_range[r] ? b + std::abs(R) : kInf;
        break;
    }
  }
  if (maximize) {
    for (auto& c : model.objective) c = -c;
    model.metadata["objective_sense"] = "negated-max";
  }
  return model;
}

inline void export_mps(const MilpModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_mps(model);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline MilpModel import_mps(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_mps(buf.str());
}

/// CPLEX LP text. Two-sided rows are written as a pair of one-sided rows.
inline std::string to_lp_format(const MilpModel& model) {
  using detail::format_number;
  std::ostringstream out;
  auto term_list = [&](const std::vector<std::pair<std::size_t, double>>& terms) {
    std::string s;
    bool first = true;
    for (const auto& [j, c] : terms) {
      if (c == 0.0) continue;
      s += first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
      s += format_number(std::abs(c)) + " " + model.variables[j].name;
      first = false;
    }
    return first ? std::string("0 ") + (model.variables.empty() ? "" : model.variables[0].name)
                 : s;
  };
  out << "\\ " << model.name << "\nMinimize\n obj: ";
  std::vector<std::pair<std::size_t, double>> obj;
  for (std::size_t j = 0; j < model.num_vars(); ++j) obj.emplace_back(j, model.objective[j]);
  out << term_list(obj) << "\nSubject To\n";
  for (const auto& c : model.constraints) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (const auto& e : c.entries) terms.emplace_back(e.var, e.coef);
    const auto expr = term_list(terms);
    if (c.lb == c.ub) {
      out << ' ' << c.name << ": " << expr << " = " << format_number(c.lb) << '\n';
      continue;
    }
    const bool both = std::isfinite(c.lb) && std::isfinite(c.ub);
    if (std::isfinite(c.lb))
      out << ' ' << c.name << (both ? "_lo" : "") << ": " << expr << " >= " << format_number(c.lb)
          << '\n';
    if (std::isfinite(c.ub))
      out << ' ' << c.name << (both ? "_hi" : "") << ": " << expr << " <= " << format_number(c.ub)
          << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : model.variables) {
    const std::string lo = std::isfinite(v.lb) ? format_number(v.lb) : "-inf";
    const std::string hi = std::isfinite(v.ub) ? format_number(v.ub) : "+inf";
    out << ' ' << lo << " <= " << v.name << " <= " << hi << '\n';
  }
  std::string ints;
  for (const auto& v : model.variables)
    if (v.integer) ints += " " + v.name + "\n";
  if (!ints.empty()) out << "Generals\n" << ints;
  out << "End\n";
  return out.str();
}

}  // namespace c2rf::milp
