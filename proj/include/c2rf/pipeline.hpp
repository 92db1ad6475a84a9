#pragma once

// End-to-end runs: sample, train one forest per seed, then classify the
// unlabeled points with each approach and score the result.

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "c2rf/bnb.hpp"
#include "c2rf/dataset.hpp"
#include "c2rf/eval.hpp"
#include "c2rf/forest.hpp"
#include "c2rf/presolve.hpp"
#include "json.hpp"

namespace c2rf {

enum class Approach { rf, c2rf, p_c2rf, only_pp, only_br };

inline constexpr std::array<Approach, 5> kAllApproaches{Approach::rf, Approach::c2rf,
                                                        Approach::p_c2rf, Approach::only_pp,
                                                        Approach::only_br};

inline const char* to_string(Approach a) {
  switch (a) {
    case Approach::rf: return "rf";
    case Approach::c2rf: return "c2rf";
    case Approach::p_c2rf: return "p-c2rf";
    case Approach::only_pp: return "only-pp";
    case Approach::only_br: return "only-br";
  }
  return "?";
}

inline Approach approach_from_string(const std::string& s) {
  for (auto a : kAllApproaches)
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown approach '" + s + "'");
}

inline bool uses_presolve(Approach a) { return a == Approach::p_c2rf || a == Approach::only_pp; }
inline bool uses_priorities(Approach a) { return a == Approach::p_c2rf || a == Approach::only_br; }

/// A CSV or c2rf-dataset JSON file, or the two-Gaussian generator when `path`
/// is empty.
struct DataSource {
  std::string name;
  std::string path;
  std::string label_column = "class";
  std::string positive_label = "1";
  char delimiter = ',';
  std::size_t count = 2000;
  std::size_t dims = 2;
  double separation = 2.0;
  double positive_fraction = 0.5;
  std::uint64_t seed = 0;

  std::string instance_name() const {
    if (!name.empty()) return name;
    if (!path.empty()) return std::filesystem::path(path).stem().string();
    return "gaussians-" + std::to_string(seed);
  }
};

struct RunConfig {
  DataSource data;
  bool scaling = true;
  SampleOptions sampling;  // its seed is replaced by each entry of `seeds`
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  ForestOptions forest;    // its seed is mixed with the sample seed
  double ell = 1.0;
  double u = 100.0;
  std::vector<Approach> approaches{kAllApproaches.begin(), kAllApproaches.end()};
  double time_limit = 7200.0;
  std::size_t node_limit = 0;
  std::string output_dir;
  std::size_t threads = 1;  // cells solved in parallel
};

inline void validate(const RunConfig& cfg) {
  if (!(cfg.ell < cfg.u)) throw std::invalid_argument("need ell < u");
  if (!(cfg.ell > 0.0)) throw std::invalid_argument("ell must be positive");
  if (cfg.seeds.empty()) throw std::invalid_argument("no seeds requested");
  if (cfg.approaches.empty()) throw std::invalid_argument("no approaches requested");
  if (!(cfg.time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (!cfg.data.path.empty() && !std::filesystem::exists(cfg.data.path))
    throw std::invalid_argument("dataset '" + cfg.data.path + "' does not exist");
}

// Config files use the same kebab-case names as the command-line flags.

inline nlohmann::json to_json(const RunConfig& c) {
  std::vector<std::string> approaches;
  for (auto a : c.approaches) approaches.push_back(to_string(a));
  return {{"name", c.data.name},
          {"dataset", c.data.path},
          {"label-column", c.data.label_column},
          {"positive-label", c.data.positive_label},
          {"delimiter", std::string(1, c.data.delimiter)},
          {"gaussian-count", c.data.count},
          {"gaussian-dims", c.data.dims},
          {"gaussian-separation", c.data.separation},
          {"gaussian-positive-fraction", c.data.positive_fraction},
          {"gaussian-seed", c.data.seed},
          {"scaling", c.scaling},
          {"labeled-fraction", c.sampling.labeled_fraction},
          {"sampling", c.sampling.mode == SamplingMode::biased ? "biased" : "simple"},
          {"p-pos", c.sampling.p_pos},
          {"seeds", c.seeds},
          {"trees", c.forest.trees},
          {"subset-fraction", c.forest.subset_fraction},
          {"forest-seed", c.forest.seed},
          {"max-depth", c.forest.tree.max_depth},
          {"min-samples-leaf", c.forest.tree.min_samples_leaf},
          {"ell", c.ell},
          {"u", c.u},
          {"approaches", approaches},
          {"time-limit", c.time_limit},
          {"node-limit", c.node_limit},
          {"out", c.output_dir},
          {"threads", c.threads}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
  const auto known = to_json(RunConfig{});
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw std::runtime_error("unknown config key '" + key + "'");
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("name", c.data.name);
  get("dataset", c.data.path);
  get("label-column", c.data.label_column);
  get("positive-label", c.data.positive_label);
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1) throw std::runtime_error("delimiter must be one character");
    c.data.delimiter = d[0];
  }
  get("gaussian-count", c.data.count);
  get("gaussian-dims", c.data.dims);
  get("gaussian-separation", c.data.separation);
  get("gaussian-positive-fraction", c.data.positive_fraction);
  get("gaussian-seed", c.data.seed);
  get("scaling", c.scaling);
  get("labeled-fraction", c.sampling.labeled_fraction);
  if (j.contains("sampling")) {
    const auto m = j.at("sampling").get<std::string>();
    if (m == "biased")
      c.sampling.mode = SamplingMode::biased;
    else if (m == "simple")
      c.sampling.mode = SamplingMode::simple;
    else
      throw std::runtime_error("sampling must be 'simple' or 'biased'");
  }
  get("p-pos", c.sampling.p_pos);
  get("seeds", c.seeds);
  get("trees", c.forest.trees);
  get("subset-fraction", c.forest.subset_fraction);
  get("forest-seed", c.forest.seed);
  get("max-depth", c.forest.tree.max_depth);
  get("min-samples-leaf", c.forest.tree.min_samples_leaf);
  get("ell", c.ell);
  get("u", c.u);
  if (j.contains("approaches")) {
    c.approaches.clear();
    for (const auto& a : j.at("approaches")) c.approaches.push_back(approach_from_string(a));
  }
  get("time-limit", c.time_limit);
  get("node-limit", c.node_limit);
  get("out", c.output_dir);
  get("threads", c.threads);
  return c;
}

inline Dataset load_source(const DataSource& src) {
  if (src.path.empty())
    return make_two_gaussians(src.count, src.dims, src.separation, src.positive_fraction, src.seed);
  if (std::filesystem::path(src.path).extension() == ".json") {
    std::ifstream in(src.path);
    if (!in) throw std::runtime_error("cannot read '" + src.path + "'");
    return dataset_from_json(nlohmann::json::parse(in));
  }
  CsvOptions o;
  o.label_column = src.label_column;
  o.positive_label = src.positive_label;
  o.delimiter = src.delimiter;
  return load_csv(src.path, o);
}

// One solve ------------------------------------------------------------------

struct ApproachOutcome {
  Solution solution;  // in the space of the input matrix
  std::optional<PresolveStats> presolve;
};

/// Runs one optimisation approach on a vote matrix. `rf` is not a solve and
/// is rejected here.
inline ApproachOutcome solve_with_approach(Approach a, const VoteMatrix& r, long lambda,
                                           double ell, double u, const milp::BnbConfig& bnb) {
  if (a == Approach::rf) throw std::invalid_argument("rf does not solve a model");
  const auto start = std::chrono::steady_clock::now();
  C2rfSolveOptions opts;
  opts.bnb = bnb;
  opts.use_priorities = uses_priorities(a);
  ApproachOutcome out;
  if (!uses_presolve(a)) {
    out.solution = solve_c2rf(r, {ell, u, lambda}, opts);
    return out;
  }
  const auto pre = presolve(r, lambda, ell, u);
  const std::chrono::duration<double> spent = std::chrono::steady_clock::now() - start;
  opts.bnb.time_limit = std::max(0.0, bnb.time_limit - spent.count());
  const auto reduced = solve_c2rf(pre.reduced, {ell, u, pre.lambda}, opts);
  out.solution = lift_solution(reduced, pre.map, r);
  out.presolve = pre.map.stats;
  const std::chrono::duration<double> total = std::chrono::steady_clock::now() - start;
  out.solution.stats.seconds = total.count();
  return out;
}

inline std::vector<int> predictions_from(const Solution& s) {
  std::vector<int> p(s.z.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = s.z[i] ? 1 : -1;
  return p;
}

// Cells ----------------------------------------------------------------------

/// Statuses: the solver's four, "done" for rf, "error" when a stage threw and
/// "skipped" when the run was interrupted before the cell started.
struct CellResult {
  std::string instance;
  std::uint64_t seed = 0;
  Approach approach = Approach::rf;
  std::string status = "skipped";
  std::string error;
  std::size_t points = 0;
  long lambda = 0;
  double eta = std::numeric_limits<double>::quiet_NaN();  // achieved |count - lambda|
  double lower_bound = 0.0;
  bool fallback = false;  // no solver point; predictions are the majority vote
  long predicted_positive = 0;
  Metrics metrics;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  std::optional<PresolveStats> presolve;

  bool terminal() const { return status != "error" && status != "skipped"; }
  /// Finished within the limit with a proven answer.
  bool solved() const {
    return (status == "optimal" || status == "infeasible" || status == "done") &&
           seconds <= time_limit;
  }
};

inline nlohmann::json to_json(const CellResult& c) {
  nlohmann::json j{{"format", "c2rf-cell"},
                   {"version", kFormatVersion},
                   {"instance", c.instance},
                   {"seed", c.seed},
                   {"approach", to_string(c.approach)},
                   {"status", c.status},
                   {"error", c.error},
                   {"points", c.points},
                   {"lambda", c.lambda},
                   {"eta", std::isnan(c.eta) ? nlohmann::json() : nlohmann::json(c.eta)},
                   {"lower_bound", c.lower_bound},
                   {"fallback", c.fallback},
                   {"predicted_positive", c.predicted_positive},
                   {"accuracy", c.metrics.accuracy},
                   {"mcc", c.metrics.mcc},
                   {"seconds", c.seconds},
                   {"time_limit", c.time_limit},
                   {"nodes", c.nodes},
                   {"lp_iterations", c.lp_iterations}};
  j["presolve"] = c.presolve ? to_json(*c.presolve) : nlohmann::json();
  return j;
}

inline CellResult cell_from_json(const nlohmann::json& j) {
  expect_format(j, "c2rf-cell");
  CellResult c;
  c.instance = j.at("instance").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.approach = approach_from_string(j.at("approach").get<std::string>());
  c.status = j.at("status").get<std::string>();
  c.error = j.at("error").get<std::string>();
  c.points = j.at("points").get<std::size_t>();
  c.lambda = j.at("lambda").get<long>();
  c.eta = j.at("eta").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                : j.at("eta").get<double>();
  c.lower_bound = j.at("lower_bound").get<double>();
  c.fallback = j.at("fallback").get<bool>();
  c.predicted_positive = j.at("predicted_positive").get<long>();
  c.metrics = {j.at("accuracy").get<double>(), j.at("mcc").get<double>()};
  c.seconds = j.at("seconds").get<double>();
  c.time_limit = j.at("time_limit").get<double>();
  c.nodes = j.at("nodes").get<std::size_t>();
  c.lp_iterations = j.at("lp_iterations").get<std::size_t>();
  if (!j.at("presolve").is_null()) c.presolve = presolve_stats_from_json(j.at("presolve"));
  return c;
}

inline std::string cell_file_name(const std::string& instance, std::uint64_t seed, Approach a) {
  return instance + "__s" + std::to_string(seed) + "__" + to_string(a) + ".json";
}

struct ResultsBundle {
  std::vector<CellResult> cells;

  bool complete() const {
    return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.terminal(); });
  }
};

/// Everything the approaches share for one sample seed.
struct SeedContext {
  SplitDataset split;
  Forest forest;
  VoteMatrix votes;
  std::vector<int> majority;
};

inline SeedContext prepare_seed(const Dataset& data, const RunConfig& cfg, std::uint64_t seed) {
  SeedContext ctx;
  auto so = cfg.sampling;
  so.seed = seed;
  ctx.split = draw_sample(data, so);
  auto fo = cfg.forest;
  fo.seed = derive_seed(cfg.forest.seed, seed);
  ctx.forest = train_forest(data, ctx.split, fo);
  ctx.votes = vote_matrix(ctx.forest, data, ctx.split.unlabeled);
  ctx.majority = majority_vote(ctx.votes);
  return ctx;
}

inline CellResult run_cell(const SeedContext& ctx, const RunConfig& cfg, Approach a) {
  CellResult c;
  c.approach = a;
  c.points = ctx.votes.num_points();
  c.lambda = static_cast<long>(ctx.split.lambda);
  c.time_limit = cfg.time_limit;
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> pred;
  if (a == Approach::rf) {
    pred = ctx.majority;
    c.status = "done";
  } else {
    milp::BnbConfig bnb;
    bnb.time_limit = cfg.time_limit;
    bnb.node_limit = cfg.node_limit;
    const auto out = solve_with_approach(a, ctx.votes, c.lambda, cfg.ell, cfg.u, bnb);
    const auto& s = out.solution;
    c.status = milp::to_string(s.status);
    c.nodes = s.stats.nodes;
    c.lp_iterations = s.stats.lp_iterations;
    c.lower_bound = s.stats.lower_bound;
    c.presolve = out.presolve;
    if (s.has_point()) {
      pred = predictions_from(s);
    } else {
      pred = ctx.majority;
      c.fallback = true;
    }
  }
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  c.seconds = dt.count();
  for (int p : pred) c.predicted_positive += p > 0;
  c.eta = static_cast<double>(std::abs(c.predicted_positive - c.lambda));
  c.metrics = metrics(pred, ctx.split.unlabeled_truth);
  return c;
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

struct RunControl {
  const std::atomic<bool>* stop = nullptr;  // checked before each cell starts
  bool resume = false;                      // reuse finished cells found on disk
  std::function<void(const CellResult&)> on_cell;
};

/// Runs every (seed, approach) cell of `cfg`. When cfg.output_dir is set each
/// cell is written to <out>/cells/ as soon as it finishes.
inline ResultsBundle run_pipeline(const RunConfig& cfg, const RunControl& ctl = {}) {
  validate(cfg);
  const std::string instance = cfg.data.instance_name();
  const std::filesystem::path cell_dir =
      cfg.output_dir.empty() ? std::filesystem::path() : std::filesystem::path(cfg.output_dir) / "cells";

  ResultsBundle bundle;
  for (auto seed : cfg.seeds)
    for (auto a : cfg.approaches) {
      CellResult c;
      c.instance = instance;
      c.seed = seed;
      c.approach = a;
      c.time_limit = cfg.time_limit;
      bundle.cells.push_back(c);
    }

  std::vector<bool> pending(bundle.cells.size(), true);
  if (ctl.resume && !cell_dir.empty()) {
    for (std::size_t k = 0; k < bundle.cells.size(); ++k) {
      const auto& c = bundle.cells[k];
      const auto path = cell_dir / cell_file_name(instance, c.seed, c.approach);
      if (!std::filesystem::exists(path)) continue;
      try {
        std::ifstream in(path);
        auto prev = cell_from_json(nlohmann::json::parse(in));
        if (prev.terminal()) {
          bundle.cells[k] = std::move(prev);
          pending[k] = false;
        }
      } catch (const std::exception&) {
        // unreadable leftovers are recomputed
      }
    }
  }

  Dataset data;
  std::string load_error;
  try {
    data = load_source(cfg.data);
    if (cfg.scaling) data = scale(std::move(data));
  } catch (const std::exception& e) {
    load_error = e.what();
  }

  const std::size_t per_seed = cfg.approaches.size();
  std::vector<std::optional<SeedContext>> contexts(cfg.seeds.size());
  std::vector<std::string> seed_errors(cfg.seeds.size(), load_error);
  std::vector<std::once_flag> prepared(cfg.seeds.size());
  auto context_for = [&](std::size_t s) -> const SeedContext* {
    std::call_once(prepared[s], [&] {
      if (!seed_errors[s].empty()) return;
      try {
        contexts[s] = prepare_seed(data, cfg, cfg.seeds[s]);
      } catch (const std::exception& e) {
        seed_errors[s] = e.what();
      }
    });
    return contexts[s] ? &*contexts[s] : nullptr;
  };

  std::mutex report_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= bundle.cells.size()) return;
      if (!pending[k]) continue;
      if (ctl.stop && ctl.stop->load()) continue;
      const std::size_t s = k / per_seed;
      auto& cell = bundle.cells[k];
      CellResult result;
      const SeedContext* ctx = context_for(s);
      if (!ctx) {
        result = cell;
        result.status = "error";
        result.error = seed_errors[s];
      } else {
        try {
          result = run_cell(*ctx, cfg, cell.approach);
        } catch (const std::exception& e) {
          result = cell;
          result.status = "error";
          result.error = e.what();
        }
      }
      result.instance = instance;
      result.seed = cell.seed;
      cell = std::move(result);
      if (!cell_dir.empty())
        write_json_file(cell_dir / cell_file_name(instance, cell.seed, cell.approach), to_json(cell));
      if (ctl.on_cell) {
        std::lock_guard lock(report_mutex);
        ctl.on_cell(cell);
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return bundle;
}

// Aggregation ----------------------------------------------------------------

struct ReportOptions {
  bool percent_scale = false;  // AC in percent, MCC as (MCC + 1) / 2 * 100
};

/// Medians are blanked with "---" when fewer than half of an approach's seeds
/// solved within the limit.
inline bool enough_solved(std::size_t solved, std::size_t seeds) { return solved * 2 >= seeds; }

inline std::string format_value(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct MedianRow {
  std::string instance;
  Approach approach = Approach::rf;
  std::size_t seeds = 0;
  std::size_t solved = 0;
  std::optional<double> seconds;
  double accuracy = 0.0;
  double mcc = 0.0;
  std::optional<double> delta_accuracy;  // versus rf on the same seeds
  std::optional<double> delta_mcc;
};

inline std::vector<MedianRow> median_table(const std::vector<CellResult>& cells) {
  std::map<std::pair<std::string, std::uint64_t>, const CellResult*> rf;
  for (const auto& c : cells)
    if (c.approach == Approach::rf && c.terminal()) rf[{c.instance, c.seed}] = &c;

  std::map<std::pair<std::string, int>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) groups[{c.instance, static_cast<int>(c.approach)}].push_back(&c);

  std::vector<MedianRow> rows;
  for (const auto& [key, group] : groups) {
    MedianRow row;
    row.instance = key.first;
    row.approach = static_cast<Approach>(key.second);
    row.seeds = group.size();
    std::vector<double> times, ac, mc, dac, dmc;
    for (const auto* c : group) {
      if (c->solved()) {
        ++row.solved;
        times.push_back(c->seconds);
      }
      if (!c->terminal()) continue;
      ac.push_back(c->metrics.accuracy);
      mc.push_back(c->metrics.mcc);
      if (auto it = rf.find({c->instance, c->seed}); it != rf.end()) {
        const auto d = deltas(c->metrics, it->second->metrics);
        dac.push_back(d.accuracy);
        dmc.push_back(d.mcc);
      }
    }
    if (!times.empty() && enough_solved(row.solved, row.seeds)) row.seconds = median(times);
    if (!ac.empty()) {
      row.accuracy = median(ac);
      row.mcc = median(mc);
    }
    if (!dac.empty()) {
      row.delta_accuracy = median(dac);
      row.delta_mcc = median(dmc);
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_reports(const std::vector<CellResult>& cells, const std::filesystem::path& dir,
                          const ReportOptions& ro = {}) {
  std::filesystem::create_directories(dir);
  const double ac_scale = ro.percent_scale ? 100.0 : 1.0;
  auto show_mcc = [&](double m) { return ro.percent_scale ? mcc_percent(m) : m; };
  auto show_dmcc = [&](double d) { return ro.percent_scale ? 50.0 * d : d; };

  {
    std::ofstream out(dir / "cells.csv");
    out << "instance,seed,approach,status,points,lambda,eta,lower_bound,fallback,"
           "predicted_positive,accuracy,mcc,seconds,nodes,lp_iterations,points_after,trees_after,error\n";
    for (const auto& c : cells) {
      std::string err = c.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << c.instance << ',' << c.seed << ',' << to_string(c.approach) << ',' << c.status << ','
          << c.points << ',' << c.lambda << ',' << (std::isnan(c.eta) ? "" : format_value(c.eta))
          << ',' << format_value(c.lower_bound) << ',' << c.fallback << ','
          << c.predicted_positive << ',' << format_value(ac_scale * c.metrics.accuracy) << ','
          << format_value(show_mcc(c.metrics.mcc)) << ',' << format_value(c.seconds) << ','
          << c.nodes << ',' << c.lp_iterations << ','
          << (c.presolve ? std::to_string(c.presolve->points_after) : "") << ','
          << (c.presolve ? std::to_string(c.presolve->trees_after) : "") << ',' << err << '\n';
    }
  }
  {
    std::map<int, std::vector<const CellResult*>> by_approach;
    for (const auto& c : cells) by_approach[static_cast<int>(c.approach)].push_back(&c);
    std::ofstream out(dir / "ecdf.csv");
    out << "approach,sigma,gamma\n";
    for (const auto& [a, group] : by_approach) {
      std::vector<double> times;
      for (const auto* c : group)
        times.push_back(c->solved() ? c->seconds : std::numeric_limits<double>::infinity());
      const auto e = ecdf(times, group.front()->time_limit);
      for (const auto& [sigma, gamma] : e.steps)
        out << to_string(static_cast<Approach>(a)) << ',' << format_value(sigma) << ','
            << format_value(gamma) << '\n';
    }
  }
  {
    std::ofstream out(dir / "medians.csv");
    out << "instance,approach,seeds,solved,median_seconds,median_accuracy,median_mcc,"
           "median_delta_accuracy,median_delta_mcc\n";
    for (const auto& r : median_table(cells)) {
      out << r.instance << ',' << to_string(r.approach) << ',' << r.seeds << ',' << r.solved << ','
          << (r.seconds ? format_value(*r.seconds) : "---") << ','
          << format_value(ac_scale * r.accuracy) << ',' << format_value(show_mcc(r.mcc)) << ','
          << (r.delta_accuracy ? format_value(ac_scale * *r.delta_accuracy) : "") << ','
          << (r.delta_mcc ? format_value(show_dmcc(*r.delta_mcc)) : "") << '\n';
    }
  }
}

/// Reads every cell JSON below <dir>/cells.
inline std::vector<CellResult> load_cells(const std::filesystem::path& dir) {
  std::vector<CellResult> cells;
  const auto cell_dir = dir / "cells";
  if (!std::filesystem::is_directory(cell_dir))
    throw std::runtime_error("no cells directory in '" + dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(cell_dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    cells.push_back(cell_from_json(nlohmann::json::parse(in)));
  }
  return cells;
}

/// Runs every configuration of the matrix with cells under <dir>/cells and
/// writes the combined reports to `dir`.
inline ResultsBundle benchmark(std::vector<RunConfig> matrix, const std::filesystem::path& dir,
                               const RunControl& ctl = {}, const ReportOptions& ro = {}) {
  std::set<std::string> names;
  for (const auto& cfg : matrix)
    if (!names.insert(cfg.data.instance_name()).second)
      throw std::invalid_argument("duplicate instance name '" + cfg.data.instance_name() + "'");
  ResultsBundle all;
  for (auto& cfg : matrix) {
    cfg.output_dir = dir.string();
    auto b = run_pipeline(cfg, ctl);
    for (auto& c : b.cells) all.cells.push_back(std::move(c));
  }
  write_reports(all.cells, dir, ro);
  return all;
}

}  // namespace c2rf
