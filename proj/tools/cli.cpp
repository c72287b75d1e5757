// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>

#include "evoboss/baselines.hpp"
#include "evoboss/boes.hpp"
#include "evoboss/embeddings.hpp"
#include "evoboss/errors.hpp"
#include "evoboss/evaluation.hpp"
#include "evoboss/landscape.hpp"
#include "evoboss/synthetic.hpp"

namespace evoboss::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reference values of the published datasets, checked by validate-data.
struct KnownDataset {
  const char* name;
  double fitness_max;
  double wild_type_fitness;
};
constexpr KnownDataset kKnownDatasets[] = {
    {"GB1", 8.76, 1.0},
    {"PhoQ", 133.59, 3.29},
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

fs::path store_index(const std::string& prefix) { return prefix + ".index"; }
fs::path store_matrix(const std::string& prefix) { return prefix + ".bin"; }

EmbeddingStore open_store(const std::string& prefix) {
  return load_store(store_index(prefix), store_matrix(prefix));
}

Landscape open_landscape(const std::string& csv, const std::string& meta_flag) {
  fs::path meta_path = meta_flag.empty() ? fs::path(csv).replace_extension(".meta") : fs::path(meta_flag);
  if (fs::exists(meta_path)) return load_landscape(csv, load_meta(meta_path));
  if (!meta_flag.empty()) throw DataError("metadata file not found: " + meta_flag);
  // Without metadata, infer n from the first data row.
  std::ifstream in(csv);
  if (!in) throw DataError("cannot open " + csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with("variant")) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(csv + ": malformed row");
    return load_landscape(csv, static_cast<int>(comma));
  }
  throw DataError(csv + ": no data rows");
}

std::vector<int> parse_counts(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [&](const std::string& s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) throw UsageError("bad screen count: " + s);
    return v;
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    // a:b or a:b:step
    auto rest = item.substr(colon + 1);
    auto colon2 = rest.find(':');
    int from = to_int(item.substr(0, colon));
    int to = to_int(rest.substr(0, colon2));
    int step = colon2 == std::string::npos ? 1 : to_int(rest.substr(colon2 + 1));
    for (int c = from; c <= to; c += step) out.push_back(c);
  }
  if (out.empty()) throw UsageError("empty screen-count list");
  return out;
}

// One value per line, or `key,value` rows (a non-numeric header is skipped).
std::vector<std::pair<std::string, double>> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.rfind(',');
    std::string key = comma == std::string::npos ? std::string() : line.substr(0, comma);
    std::string value = comma == std::string::npos ? line : line.substr(comma + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      if (lineno == 1) continue;
      throw DataError(path + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    rows.emplace_back(key, v);
  }
  return rows;
}

int default_jobs() {
  if (const char* env = std::getenv("EVOBOSS_JOBS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

// Flags shared by `run` and `sweep`.
struct MethodFlags {
  std::string method = "boes";
  std::string landscape;
  std::string meta;
  std::string store;
  std::string store_kind = "embedding";
  int budget = 0;
  std::uint64_t seed = 0;
  int batch = 1;
  std::string init = "start_only";
  std::string kernel = "matern32";
  std::string fit_objective = "map";
  bool no_warm_start = false;
  int top_k = 3;
  std::optional<double> stop_at;

  void attach(CLI::App* app) {
    app->add_option("--method", method, "boes, smw, recombination or random")
        ->check(CLI::IsMember({"boes", "smw", "recombination", "random"}));
    app->add_option("--landscape", landscape, "landscape CSV (variant,fitness)")->required();
    app->add_option("--meta", meta, "metadata sidecar; defaults to the CSV path with .meta");
    app->add_option("--store", store, "embedding store prefix (<prefix>.index, <prefix>.bin)");
    app->add_option("--store-kind", store_kind, "label echoed in traces")
        ->check(CLI::IsMember({"embedding", "onehot", "synthetic"}));
    app->add_option("--budget", budget, "screening budget")->required()->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "random seed");
    app->add_option("--batch", batch, "variants screened per BO iteration")->check(CLI::PositiveNumber);
    app->add_option("--init", init, "start_only or random:<k>");
    app->add_option("--kernel", kernel)->check(CLI::IsMember({"matern32", "se"}));
    app->add_option("--fit-objective", fit_objective)->check(CLI::IsMember({"map", "mle"}));
    app->add_flag("--no-warm-start", no_warm_start, "do not seed the fit with the previous theta");
    app->add_option("--stop-at", stop_at, "boes: stop once this fitness is reached");
    app->add_option("--top-k", top_k, "recombination residues kept per position")->check(CLI::Range(1, 20));
  }

  RunConfig boes_config() const {
    RunConfig c;
    c.budget = budget;
    c.seed = seed;
    c.batch = batch;
    c.kernel_family = parse_kernel_family(kernel);
    c.fit_objective = parse_fit_objective(fit_objective);
    c.warm_start = !no_warm_start;
    c.store_kind = parse_store_kind(store_kind);
    c.stop_at = stop_at;
    if (init == "start_only") {
      c.init_random = 0;
    } else if (init.starts_with("random:")) {
      c.init_random = std::atoi(init.c_str() + 7);
      if (c.init_random < 1) throw UsageError("--init random:<k> needs k >= 1");
    } else {
      throw UsageError("--init must be start_only or random:<k>");
    }
    return c;
  }
};

Variant resolve_start(const std::string& start, const Landscape& landscape) {
  if (start == "wild_type") return landscape.wild_type();
  Variant v = Variant::from_word(start);
  if (v.length() != landscape.n()) throw UsageError("--start has the wrong length");
  return v;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& csv, const std::string& meta_path, std::ostream& out) {
  LandscapeMeta meta = load_meta(meta_path);
  Landscape landscape = load_landscape(csv, meta);
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& [v, y] : landscape.measured_sorted()) lo = std::min(lo, y);
  double wt = landscape.fitness(landscape.wild_type());
  out << "name=" << landscape.name() << "\n"
      << "n=" << landscape.n() << "\n"
      << "measured=" << landscape.measured_count() << " of " << landscape.space_size() << "\n"
      << "fitness_min=" << fmt(lo) << "\n"
      << "fitness_max=" << fmt(landscape.fitness_max()) << "\n"
      << "wild_type=" << landscape.wild_type().word() << " fitness=" << fmt(wt) << "\n";
  for (const auto& known : kKnownDatasets) {
    if (lower(landscape.name()) != lower(known.name)) continue;
    constexpr double tol = 5e-3;  // published values carry two decimals
    if (std::abs(landscape.fitness_max() - known.fitness_max) > tol) {
      throw DataError(std::string(known.name) + ": maximum fitness " + fmt(landscape.fitness_max()) +
                      " does not match the published " + fmt(known.fitness_max));
    }
    if (lo < -tol || lo > tol) throw DataError(std::string(known.name) + ": minimum fitness is not 0.0");
    if (std::abs(wt - known.wild_type_fitness) > tol) {
      throw DataError(std::string(known.name) + ": wild-type fitness " + fmt(wt) +
                      " does not match the published " + fmt(known.wild_type_fitness));
    }
    out << "check=" << known.name << " ranges OK\n";
  }
  return kExitOk;
}

RunTrace dispatch_run(const MethodFlags& flags, const Landscape& landscape, const EmbeddingStore* store,
                      const Variant& start) {
  if (flags.method == "boes") {
    if (!store) throw UsageError("--store is required for --method boes");
    RunConfig c = flags.boes_config();
    c.start = start;
    return run_boes(c, landscape, *store);
  }
  if (flags.method == "smw") return run_smw(landscape, start, flags.budget, flags.seed);
  if (flags.method == "recombination") {
    return run_recombination(landscape, start, flags.budget, flags.top_k, flags.seed);
  }
  return run_random(landscape, flags.budget, flags.seed);
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian optimization in embedding space for in-silico directed evolution", "evoboss"};
  app.require_subcommand(1);

  // validate-data
  std::string v_csv, v_meta;
  auto* validate = app.add_subcommand("validate-data", "check a landscape CSV and its metadata");
  validate->add_option("landscape", v_csv)->required();
  validate->add_option("meta", v_meta)->required();

  // synth-embed / onehot-embed
  int e_n = 4, e_dim = 32;
  std::uint64_t e_seed = 0;
  std::string e_out;
  auto* synth = app.add_subcommand("synth-embed", "write synthetic embeddings for all 20^n variants");
  synth->add_option("--n", e_n)->required()->check(CLI::Range(1, 7));
  synth->add_option("--dim", e_dim)->check(CLI::Range(2, 1 << 20));
  synth->add_option("--seed", e_seed);
  synth->add_option("--out", e_out, "output prefix")->required();
  auto* onehot = app.add_subcommand("onehot-embed", "write one-hot encodings for all 20^n variants");
  onehot->add_option("--n", e_n)->required()->check(CLI::Range(1, 7));
  onehot->add_option("--out", e_out, "output prefix")->required();

  // synth-landscape
  std::string sl_store, sl_out;
  std::uint64_t sl_seed = 0;
  int sl_locals = 3;
  auto* synth_land = app.add_subcommand("synth-landscape", "plant a smooth landscape over a store");
  synth_land->add_option("--store", sl_store)->required();
  synth_land->add_option("--seed", sl_seed);
  synth_land->add_option("--local-optima", sl_locals)->check(CLI::NonNegativeNumber);
  synth_land->add_option("--out", sl_out, "output prefix (<prefix>.csv, <prefix>.meta)")->required();

  // run
  MethodFlags run_flags;
  std::string r_start = "wild_type", r_out;
  bool r_force = false;
  auto* run = app.add_subcommand("run", "run one optimization and write its trace");
  run_flags.attach(run);
  run->add_option("--start", r_start, "wild_type or a variant word");
  run->add_option("--out", r_out, "trace file (JSON lines)")->required();
  run->add_flag("--force", r_force, "overwrite an existing trace file");

  // sweep
  MethodFlags sweep_flags;
  int s_runs = 0, s_jobs = 0;
  std::string s_sampling = "uniform", s_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "repeat a method from many starting variants");
  sweep_flags.attach(sweep_cmd);
  sweep_cmd->add_option("--runs", s_runs, "number of uniformly drawn starts")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--start-sampling", s_sampling, "uniform, uniform:<R> or all");
  sweep_cmd->add_option("--out-dir", s_out)->required();
  sweep_cmd->add_option("--jobs", s_jobs, "parallel runs (default EVOBOSS_JOBS or all cores)")
      ->check(CLI::PositiveNumber);

  // report
  std::string rep_dir, rep_grid = "1:200", rep_snaps = "50,100,150,190", rep_out;
  auto* report = app.add_subcommand("report", "quartile curves and snapshot distributions");
  report->add_option("--traces-dir", rep_dir)->required();
  report->add_option("--grid", rep_grid, "screen counts, e.g. 1:200 or 10,20,50");
  report->add_option("--snapshots", rep_snaps);
  report->add_option("--out", rep_out, "output directory")->required();

  // ndcg
  std::string n_pred, n_truth, n_gain = "linear";
  auto* ndcg_cmd = app.add_subcommand("ndcg", "ranking quality of predictions against truth");
  ndcg_cmd->add_option("--pred", n_pred)->required();
  ndcg_cmd->add_option("--truth", n_truth)->required();
  ndcg_cmd->add_option("--gain", n_gain)->check(CLI::IsMember({"linear", "exp"}));

  // pca
  std::string p_store, p_out;
  int p_k = 2;
  auto* pca_cmd = app.add_subcommand("pca", "project a store onto its principal components");
  pca_cmd->add_option("--store", p_store)->required();
  pca_cmd->add_option("--k", p_k)->check(CLI::PositiveNumber);
  pca_cmd->add_option("--out", p_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(v_csv, v_meta, out);

    if (synth->parsed() || onehot->parsed()) {
      auto variants = enumerate_variants(e_n);
      EmbeddingStore store = synth->parsed() ? synth_store(variants, e_dim, e_seed) : onehot_store(variants);
      write_store(store, store_index(e_out), store_matrix(e_out));
      out << "wrote " << store.count() << " x " << store.dim() << " to " << e_out << ".{index,bin}\n";
      return kExitOk;
    }

    if (synth_land->parsed()) {
      EmbeddingStore store = open_store(sl_store);
      PlantedOptions options;
      options.seed = sl_seed;
      options.local_optima = sl_locals;
      PlantedLandscape planted = planted_landscape(store, options);
      int n = planted.landscape.n();
      write_landscape(sl_out + ".csv", planted.landscape);
      write_meta(sl_out + ".meta", LandscapeMeta{"planted", n, planted.landscape.position_labels(),
                                                 planted.landscape.wild_type().word()});
      out << "global_optimum=" << planted.global_optimum.word()
          << " fitness=" << fmt(planted.landscape.fitness_max()) << "\n";
      return kExitOk;
    }

    if (run->parsed()) {
      if (fs::exists(r_out) && !r_force) {
        throw UsageError(r_out + " exists; pass --force to overwrite");
      }
      Landscape landscape = open_landscape(run_flags.landscape, run_flags.meta);
      std::optional<EmbeddingStore> store;
      if (!run_flags.store.empty()) store = open_store(run_flags.store);
      Variant start = resolve_start(r_start, landscape);
      RunTrace trace = dispatch_run(run_flags, landscape, store ? &*store : nullptr, start);
      write_trace(r_out, trace);
      out << "screened=" << trace.records.size() << " best=" << fmt(trace.final_best()) << "\n";
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      Landscape landscape = open_landscape(sweep_flags.landscape, sweep_flags.meta);
      std::optional<EmbeddingStore> store;
      if (!sweep_flags.store.empty()) store = open_store(sweep_flags.store);
      SweepSpec spec;
      spec.method = parse_sweep_method(sweep_flags.method);
      if (s_sampling == "uniform") {
        if (s_runs < 1) throw UsageError("--runs is required with uniform start sampling");
        s_sampling = "uniform:" + std::to_string(s_runs);
      }
      spec.start_sampling = StartSampling::parse(s_sampling, sweep_flags.seed);
      spec.budget = sweep_flags.budget;
      spec.seed = sweep_flags.seed;
      spec.boes = sweep_flags.boes_config();
      spec.top_k = sweep_flags.top_k;
      spec.jobs = s_jobs > 0 ? s_jobs : default_jobs();
      spec.out_dir = fs::path(s_out);
      if (spec.method == SweepMethod::Boes && !store) throw UsageError("--store is required for --method boes");
      auto traces = sweep(spec, landscape, store ? &*store : nullptr);
      out << "runs=" << traces.size() << " out_dir=" << s_out << "\n";
      return kExitOk;
    }

    if (report->parsed()) {
      auto traces = read_trace_dir(rep_dir);
      if (traces.empty()) throw DataError("no *.jsonl traces in " + rep_dir);
      auto grid = parse_counts(rep_grid);
      auto at = parse_counts(rep_snaps);
      fs::create_directories(rep_out);
      std::ofstream(fs::path(rep_out) / "curves.csv", std::ios::binary) << curves_csv(quartile_curves(traces, grid));
      std::ofstream(fs::path(rep_out) / "snapshots.csv", std::ios::binary) << snapshots_csv(snapshots(traces, at));
      out << "traces=" << traces.size() << " wrote curves.csv and snapshots.csv to " << rep_out << "\n";
      return kExitOk;
    }

    if (ndcg_cmd->parsed()) {
      auto pred_rows = read_values(n_pred);
      auto truth_rows = read_values(n_truth);
      std::vector<double> pred, truth;
      bool keyed = !pred_rows.empty() && !pred_rows.front().first.empty() && !truth_rows.empty() &&
                   !truth_rows.front().first.empty();
      if (keyed) {
        std::unordered_map<std::string, double> by_key;
        for (const auto& [k, v] : truth_rows) by_key[k] = v;
        for (const auto& [k, v] : pred_rows) {
          auto it = by_key.find(k);
          if (it == by_key.end()) throw DataError("key '" + k + "' missing from truth file");
          pred.push_back(v);
          truth.push_back(it->second);
        }
        if (pred.size() != truth_rows.size()) throw DataError("prediction and truth keys differ");
      } else {
        for (const auto& r : pred_rows) pred.push_back(r.second);
        for (const auto& r : truth_rows) truth.push_back(r.second);
        if (pred.size() != truth.size()) throw DataError("prediction and truth lengths differ");
      }
      double value = ndcg(pred, truth, n_gain == "exp" ? NdcgGain::Exponential : NdcgGain::Linear);
      out << "ndcg," << fmt(value) << "\n";
      return kExitOk;
    }

    if (pca_cmd->parsed()) {
      EmbeddingStore store = open_store(p_store);
      PcaResult result = pca(store, p_k);
      std::ofstream csv(p_out, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + p_out);
      csv << "variant";
      for (int c = 1; c <= p_k; ++c) csv << ",pc" << c;
      csv << "\n";
      for (std::size_t r = 0; r < store.count(); ++r) {
        csv << store.variant(r).word();
        for (int c = 0; c < p_k; ++c) csv << "," << fmt(result.projection(static_cast<Eigen::Index>(r), c));
        csv << "\n";
      }
      out << "component,explained_variance_ratio\n";
      for (int c = 0; c < p_k; ++c) out << "pc" << c + 1 << "," << fmt(result.explained_variance_ratio[c]) << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::out_of_range& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace evoboss::cli
