// c2rf: command-line front end for the pipeline stages.
//
// Exit codes: 0 success, 1 bad input or a failed stage, 2 a benchmark left
// cells without a terminal status (errors or an interrupt).

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "c2rf/c2rf.hpp"

using namespace c2rf;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void on_interrupt(int) { g_stop = true; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  return json::parse(in);
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

VoteMatrix load_votes(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    return read_votes_csv(in);
  }
  return votes_from_json(read_json(path));
}

// lambda comes from --lambda or, failing that, from a split file.
struct TargetArgs {
  long lambda = -1;
  std::string split;

  void add(CLI::App* app) {
    app->add_option("--lambda", lambda, "Target number of positive points");
    app->add_option("--split", split, "Split JSON supplying lambda and ground truth")
        ->check(CLI::ExistingFile);
  }
  std::optional<SplitDataset> load_split() const {
    if (split.empty()) return std::nullopt;
    return split_from_json(read_json(split));
  }
  long resolve(const std::optional<SplitDataset>& s) const {
    if (lambda >= 0) return lambda;
    if (s) return static_cast<long>(s->lambda);
    throw std::runtime_error("give --lambda or --split");
  }
};

json solution_json(const Solution& s) {
  return {{"status", milp::to_string(s.status)},
          {"eta", s.has_point() ? json(s.eta) : json()},
          {"alpha", s.alpha},
          {"z", s.z},
          {"nodes", s.stats.nodes},
          {"lp_iterations", s.stats.lp_iterations},
          {"seconds", s.stats.seconds},
          {"lower_bound", s.stats.lower_bound}};
}

// Flags that may override a benchmark config. Values are converted using the
// type of the matching key in the default config.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(CLI::App* app) {
    const auto defaults = to_json(RunConfig{});
    for (const auto& [key, value] : defaults.items()) {
      std::string help = value.is_array() ? "Comma-separated list" : "Overrides the config value";
      app->add_option("--" + key, values[key], help);
    }
  }

  json apply(json base, CLI::App* app) const {
    const auto defaults = to_json(RunConfig{});
    for (const auto& [key, text] : values) {
      if (app->get_option("--" + key)->count() == 0) continue;
      const auto& like = defaults.at(key);
      base[key] = convert(like, text, key);
    }
    return base;
  }

  static json convert(const json& like, const std::string& text, const std::string& key) {
    try {
      if (like.is_array()) {
        json arr = json::array();
        std::stringstream ss(text);
        std::string item;
        const json elem = like.empty() ? json("") : like.front();
        while (std::getline(ss, item, ','))
          if (!item.empty()) arr.push_back(convert(elem, item, key));
        return arr;
      }
      if (like.is_boolean()) {
        if (text == "true" || text == "1" || text == "on") return true;
        if (text == "false" || text == "0" || text == "off") return false;
        throw std::invalid_argument("not a boolean");
      }
      if (like.is_number_unsigned()) {
        if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
        return std::stoull(text);
      }
      if (like.is_number()) return std::stod(text);
      return text;
    } catch (const std::exception&) {
      throw std::runtime_error("bad value '" + text + "' for --" + key);
    }
  }
};

void print_medians(const std::vector<CellResult>& cells, bool percent_scale) {
  const double ac_scale = percent_scale ? 100.0 : 1.0;
  std::printf("%-20s %-8s %6s %12s %10s %10s %10s %10s\n", "instance", "approach", "solved",
              "median_s", "AC", "MCC", "dAC", "dMCC");
  for (const auto& r : median_table(cells)) {
    const double mcc = percent_scale ? mcc_percent(r.mcc) : r.mcc;
    std::printf("%-20s %-8s %3zu/%-2zu %12s %10.4f %10.4f", r.instance.c_str(), to_string(r.approach),
                r.solved, r.seeds, r.seconds ? format_value(*r.seconds).c_str() : "---",
                ac_scale * r.accuracy, mcc);
    if (r.delta_accuracy)
      std::printf(" %10.4f %10.4f\n", ac_scale * *r.delta_accuracy,
                  percent_scale ? 50.0 * *r.delta_mcc : *r.delta_mcc);
    else
      std::printf(" %10s %10s\n", "", "");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cardinality-constrained random forests: sample, train, solve, benchmark."};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a CSV, clean and optionally scale it");
  std::string csv_path, ingest_out = "-", label_column = "class", positive_label = "1";
  std::string delimiter = ",";
  bool no_scale = false;
  ingest->add_option("--csv", csv_path, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
  ingest->add_option("--label-column", label_column, "Name of the label column")->capture_default_str();
  ingest->add_option("--positive-label", positive_label, "Label value of the positive class")->capture_default_str();
  ingest->add_option("--delimiter", delimiter, "Field separator")->capture_default_str();
  ingest->add_flag("--no-scale", no_scale, "Skip the shift-and-rescale step");
  ingest->add_option("--out", ingest_out, "Dataset JSON (- for stdout)")->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Split a dataset into labeled and unlabeled points");
  std::string sample_dataset, sample_out = "-", sampling = "biased";
  SampleOptions so;
  sample->add_option("--dataset", sample_dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("--labeled-fraction", so.labeled_fraction, "Share of labeled points")->capture_default_str();
  sample->add_option("--sampling", sampling, "simple or biased")
      ->check(CLI::IsMember({"simple", "biased"}))
      ->capture_default_str();
  sample->add_option("--p-pos", so.p_pos, "Biased mode: chance a slot is positive")->capture_default_str();
  sample->add_option("--seed", so.seed, "Sampling seed")->capture_default_str();
  sample->add_option("--out", sample_out, "Split JSON (- for stdout)")->capture_default_str();

  // forest
  auto* forest = app.add_subcommand("forest", "Train a forest and record its votes on the unlabeled points");
  std::string forest_dataset, forest_split, forest_out, votes_out = "-", votes_csv;
  ForestOptions fo;
  forest->add_option("--dataset", forest_dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
  forest->add_option("--split", forest_split, "Split JSON")->required()->check(CLI::ExistingFile);
  forest->add_option("--trees", fo.trees, "Number of trees")->capture_default_str();
  forest->add_option("--subset-fraction", fo.subset_fraction, "Labeled share each tree trains on")->capture_default_str();
  forest->add_option("--seed", fo.seed, "Forest seed")->capture_default_str();
  forest->add_option("--max-depth", fo.tree.max_depth, "Tree depth limit")->capture_default_str();
  forest->add_option("--min-samples-leaf", fo.tree.min_samples_leaf, "Smallest leaf")->capture_default_str();
  forest->add_option("--threads", fo.threads, "Training threads")->capture_default_str();
  forest->add_option("--out", forest_out, "Forest JSON");
  forest->add_option("--votes", votes_out, "Vote matrix JSON (- for stdout)")->capture_default_str();
  forest->add_option("--votes-csv", votes_csv, "Vote matrix as CSV");

  // solve
  auto* solve = app.add_subcommand("solve", "Classify the points of a vote matrix");
  std::string solve_votes, solve_out = "-", solve_approach = "p-c2rf";
  TargetArgs solve_target;
  double solve_ell = 1.0, solve_u = 100.0, solve_limit = 7200.0;
  std::size_t solve_nodes = 0;
  solve->add_option("--votes", solve_votes, "Vote matrix (JSON or CSV)")->required()->check(CLI::ExistingFile);
  solve_target.add(solve);
  solve->add_option("--approach", solve_approach, "rf, c2rf, p-c2rf, only-pp or only-br")
      ->check(CLI::IsMember({"rf", "c2rf", "p-c2rf", "only-pp", "only-br"}))
      ->capture_default_str();
  solve->add_option("--ell", solve_ell, "Lower weight bound")->capture_default_str();
  solve->add_option("--u", solve_u, "Upper weight bound")->capture_default_str();
  solve->add_option("--time-limit", solve_limit, "Seconds")->capture_default_str();
  solve->add_option("--node-limit", solve_nodes, "0 for none")->capture_default_str();
  solve->add_option("--out", solve_out, "Result JSON (- for stdout)")->capture_default_str();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Run every seed and approach and aggregate");
  std::string bench_config;
  bool resume = false, bench_percent_scale = false;
  Overrides overrides;
  bench->add_option("--config", bench_config, "JSON config: an object or a list of objects")
      ->check(CLI::ExistingFile);
  overrides.add(bench);
  bench->add_flag("--resume", resume, "Keep finished cells already on disk");
  bench->add_flag("--percent-scale", bench_percent_scale, "AC in percent, MCC as (MCC+1)/2*100");

  // report
  auto* report = app.add_subcommand("report", "Rebuild the aggregate tables of a benchmark directory");
  std::string report_dir;
  bool report_percent_scale = false;
  report->add_option("--dir", report_dir, "Benchmark output directory")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--percent-scale", report_percent_scale, "AC in percent, MCC as (MCC+1)/2*100");

  // export-mps
  auto* exp = app.add_subcommand("export-mps", "Write the model for an external solver");
  std::string exp_votes, exp_out, exp_format = "mps", exp_map;
  TargetArgs exp_target;
  double exp_ell = 1.0, exp_u = 100.0;
  bool exp_presolve = false;
  exp->add_option("--votes", exp_votes, "Vote matrix (JSON or CSV)")->required()->check(CLI::ExistingFile);
  exp_target.add(exp);
  exp->add_option("--ell", exp_ell, "Lower weight bound")->capture_default_str();
  exp->add_option("--u", exp_u, "Upper weight bound")->capture_default_str();
  exp->add_option("--format", exp_format, "mps or lp")->check(CLI::IsMember({"mps", "lp"}))->capture_default_str();
  exp->add_flag("--presolve", exp_presolve, "Export the reduced model");
  exp->add_option("--map", exp_map, "With --presolve: where to write the presolve map");
  exp->add_option("--out", exp_out, "Model file")->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exhaustive search for tiny instances (at most 20 points)");
  std::string oracle_votes, oracle_out = "-";
  TargetArgs oracle_target;
  double oracle_ell = 1.0, oracle_u = 100.0;
  oracle->add_option("--votes", oracle_votes, "Vote matrix (JSON or CSV)")->required()->check(CLI::ExistingFile);
  oracle_target.add(oracle);
  oracle->add_option("--ell", oracle_ell, "Lower weight bound")->capture_default_str();
  oracle->add_option("--u", oracle_u, "Upper weight bound")->capture_default_str();
  oracle->add_option("--out", oracle_out, "Result JSON (- for stdout)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      if (delimiter.size() != 1) throw std::runtime_error("delimiter must be one character");
      CsvOptions o;
      o.label_column = label_column;
      o.positive_label = positive_label;
      o.delimiter = delimiter[0];
      auto d = load_csv(csv_path, o);
      if (!no_scale) d = scale(std::move(d));
      write_json(ingest_out, to_json(d));
      std::cerr << "ingested " << d.size() << " points, " << d.dims << " features\n";
    } else if (*sample) {
      so.mode = sampling == "biased" ? SamplingMode::biased : SamplingMode::simple;
      const auto d = dataset_from_json(read_json(sample_dataset));
      const auto s = draw_sample(d, so);
      write_json(sample_out, to_json(s));
      std::cerr << "labeled " << s.n() << ", unlabeled " << s.m() << ", lambda " << s.lambda << '\n';
    } else if (*forest) {
      const auto d = dataset_from_json(read_json(forest_dataset));
      const auto s = split_from_json(read_json(forest_split));
      const auto f = train_forest(d, s, fo);
      const auto r = vote_matrix(f, d, s.unlabeled);
      if (!forest_out.empty()) write_json(forest_out, to_json(f));
      if (!votes_csv.empty()) {
        std::ofstream out(votes_csv);
        if (!out) throw std::runtime_error("cannot write '" + votes_csv + "'");
        write_votes_csv(out, r);
      }
      write_json(votes_out, to_json(r));
    } else if (*solve) {
      const auto r = load_votes(solve_votes);
      const auto split = solve_target.load_split();
      const long lambda = solve_target.resolve(split);
      const auto a = approach_from_string(solve_approach);
      json out{{"approach", solve_approach}, {"lambda", lambda}};
      std::vector<int> pred;
      if (a == Approach::rf) {
        pred = majority_vote(r);
        long pos = 0;
        for (int p : pred) pos += p > 0;
        out["status"] = "done";
        out["eta"] = std::abs(pos - lambda);
      } else {
        milp::BnbConfig bnb;
        bnb.time_limit = solve_limit;
        bnb.node_limit = solve_nodes;
        const auto res = solve_with_approach(a, r, lambda, solve_ell, solve_u, bnb);
        out.update(solution_json(res.solution));
        if (res.presolve) out["presolve"] = to_json(*res.presolve);
        if (res.solution.has_point()) pred = predictions_from(res.solution);
      }
      out["predictions"] = pred;
      if (split && !pred.empty()) {
        if (split->unlabeled_truth.size() != pred.size())
          throw std::runtime_error("split does not match the vote matrix");
        const auto m = metrics(pred, split->unlabeled_truth);
        out["accuracy"] = m.accuracy;
        out["mcc"] = m.mcc;
      }
      write_json(solve_out, out);
    } else if (*bench) {
      json base = json::object();
      if (!bench_config.empty()) base = read_json(bench_config);
      std::vector<json> entries;
      if (base.is_array())
        entries.assign(base.begin(), base.end());
      else
        entries.push_back(base);
      std::vector<RunConfig> matrix;
      for (auto& e : entries) matrix.push_back(run_config_from_json(overrides.apply(e, bench)));
      const std::string out_dir = matrix.front().output_dir;
      if (out_dir.empty()) throw std::runtime_error("benchmark needs --out or an \"out\" config key");
      for (const auto& c : matrix) validate(c);

      std::signal(SIGINT, on_interrupt);
      std::signal(SIGTERM, on_interrupt);
      RunControl ctl;
      ctl.stop = &g_stop;
      ctl.resume = resume;
      ctl.on_cell = [](const CellResult& c) {
        std::cerr << c.instance << " seed " << c.seed << ' ' << to_string(c.approach) << ": "
                  << c.status;
        if (c.status == "error") std::cerr << " (" << c.error << ')';
        else std::cerr << " eta " << c.eta << " AC " << c.metrics.accuracy << " " << c.seconds << "s";
        std::cerr << '\n';
      };
      write_json((std::filesystem::path(out_dir) / "config.json").string(),
                 entries.size() == 1 ? to_json(matrix.front()) : [&] {
                   json arr = json::array();
                   for (const auto& c : matrix) arr.push_back(to_json(c));
                   return arr;
                 }());
      const auto b = benchmark(matrix, out_dir, ctl, {bench_percent_scale});
      print_medians(b.cells, bench_percent_scale);
      if (!b.complete()) {
        std::cerr << "some cells did not finish; see " << out_dir << "/cells.csv\n";
        return 2;
      }
    } else if (*report) {
      const auto cells = load_cells(report_dir);
      write_reports(cells, report_dir, {report_percent_scale});
      print_medians(cells, report_percent_scale);
    } else if (*exp) {
      const auto r = load_votes(exp_votes);
      const long lambda = exp_target.resolve(exp_target.load_split());
      milp::MilpModel model;
      if (exp_presolve) {
        const auto pre = presolve(r, lambda, exp_ell, exp_u);
        model = build_milp(pre.reduced, {exp_ell, exp_u, pre.lambda});
        if (!exp_map.empty()) write_json(exp_map, to_json(pre.map));
      } else {
        if (!exp_map.empty()) throw std::runtime_error("--map needs --presolve");
        model = build_milp(r, {exp_ell, exp_u, lambda});
      }
      std::ofstream out(exp_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + exp_out + "'");
      out << (exp_format == "lp" ? milp::to_lp_format(model) : milp::to_mps(model));
      std::cerr << "wrote " << model.num_vars() << " columns, " << model.constraints.size()
                << " rows\n";
    } else if (*oracle) {
      const auto r = load_votes(oracle_votes);
      const long lambda = oracle_target.resolve(oracle_target.load_split());
      const auto s = brute_force_solve(r, lambda, oracle_ell, oracle_u);
      write_json(oracle_out, solution_json(s));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
