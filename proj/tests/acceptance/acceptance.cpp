// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "evoboss/acquisition.hpp"
#include "evoboss/baselines.hpp"
#include "evoboss/boes.hpp"
#include "evoboss/evaluation.hpp"
#include "evoboss/gp.hpp"
#include "evoboss/rng.hpp"
#include "evoboss/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace evoboss;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool skipped = false;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* tag = o.skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
  if (!o.skipped && !o.pass) ++failures;
  std::printf("%s  %-28s %s (%.2fs)\n", tag, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double prior_draw(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> z(0.0, sigma);
  return std::abs(z(rng));
}

// Oracle objective: dense likelihood plus the half-normal log density.
double oracle_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double theta, double jitter,
                        double sigma, FitObjective objective) {
  double lml = oracle::dense_gp(X, y, theta, jitter).lml;
  if (objective == FitObjective::Mle) return lml;
  return lml + std::log(2.0 / (sigma * std::sqrt(2.0 * std::numbers::pi))) - theta * theta / (2.0 * sigma * sigma);
}

Outcome gp_oracle() {
  std::mt19937_64 rng(101);
  double worst_post = 0.0, worst_lml = 0.0, worst_lml_rel = 0.0;
  int lml_misses = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (int inst = 0; inst < 100; ++inst) {
    int t = 1 + static_cast<int>(rng() % 6);
    int m = 1 + static_cast<int>(rng() % 8);
    Eigen::MatrixXd X = oracle::random_matrix(rng, t, m);
    Eigen::VectorXd y = oracle::random_matrix(rng, t, 1, 0.0, 5.0).col(0);
    double theta = prior_draw(rng, std::sqrt(m) / 3.0) + 0.05;
    double j = default_jitter({KernelFamily::Matern32Scaled, theta});
    FittedGP gp(X, y, {KernelFamily::Matern32Scaled, theta}, j);
    oracle::PreciseGp ref(X, y, theta, j);
    double d = std::abs(gp.log_marginal_likelihood() - ref.lml);
    if (d > 1e-8) ++lml_misses;
    worst_lml = std::max(worst_lml, d);
    worst_lml_rel = std::max(worst_lml_rel, d / std::abs(ref.lml));
    for (int q = 0; q < 5; ++q) {
      Eigen::VectorXd e = oracle::random_matrix(rng, m, 1, -1.5, 1.5).col(0);
      auto [mu, var] = ref.posterior(e);
      Posterior p = gp.posterior(e);
      worst_post = std::max({worst_post, std::abs(p.mean - mu), std::abs(p.variance - std::max(var, 0.0))});
    }
  }
  double secs = elapsed_since(t0);
  std::ostringstream detail;
  detail << fmt("posterior max diff %.2e", worst_post) << fmt(", lml max diff %.2e", worst_lml)
         << fmt(" (rel %.1e", worst_lml_rel) << ", " << lml_misses << "/100 over 1e-8)" << fmt(", %.3fs", secs);
  return {worst_post <= 1e-8 && worst_lml <= 1e-8 && secs < 5.0, detail.str()};
}

Outcome interpolation() {
  std::mt19937_64 rng(102);
  double worst_mean = 0.0, worst_var = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    int t = 1 + static_cast<int>(rng() % 12);
    int m = 1 + static_cast<int>(rng() % 32);
    Eigen::MatrixXd X = oracle::random_matrix(rng, t, m);
    Eigen::VectorXd y = oracle::random_matrix(rng, t, 1, 0.0, 10.0).col(0);
    FittedGP gp = fit(X, y, LengthScalePrior::for_dimension(m));
    for (int i = 0; i < t; ++i) {
      Posterior p = gp.posterior(X.row(i).transpose());
      worst_mean = std::max(worst_mean, std::abs(p.mean - y[i]) / (1.0 + std::abs(y[i])));
      worst_var = std::max(worst_var, p.variance);
    }
  }
  return {worst_mean <= 1e-6 && worst_var <= 1e-6,
          fmt("max |mu-y|/(1+|y|) %.2e", worst_mean) + fmt(", max var %.2e", worst_var)};
}

Outcome kernel_psd() {
  std::mt19937_64 rng(103);
  double worst = std::numeric_limits<double>::infinity();
  for (int draw = 0; draw < 100; ++draw) {
    int m = 2 + static_cast<int>(rng() % 31);
    Eigen::MatrixXd X = oracle::random_matrix(rng, 50, m);
    double theta = prior_draw(rng, LengthScalePrior::for_dimension(m).sigma);
    Eigen::MatrixXd K = kernel_matrix(X, {KernelFamily::Matern32Scaled, theta});
    worst = std::min(worst, oracle::jacobi_eigenvalues(K).back());
  }
  return {worst >= -1e-8, fmt("min eigenvalue %.3e", worst)};
}

Outcome fit_optimality() {
  std::mt19937_64 rng(104);
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_self = 0.0;
  for (auto objective : {FitObjective::Map, FitObjective::Mle}) {
    for (int inst = 0; inst < 20; ++inst) {
      int t = 2 + static_cast<int>(rng() % 6);
      int m = 1 + static_cast<int>(rng() % 8);
      Eigen::MatrixXd X = oracle::random_matrix(rng, t, m);
      Eigen::VectorXd y = oracle::random_matrix(rng, t, 1, 0.0, 5.0).col(0);
      auto prior = LengthScalePrior::for_dimension(m);
      FitOptions opts;
      opts.objective = objective;
      FittedGP gp = fit(X, y, prior, opts);
      double grid_max = -std::numeric_limits<double>::infinity();
      for (int g = 0; g < 10000; ++g) {
        double th = 6.0 * prior.sigma * g / 9999.0;
        grid_max = std::max(grid_max, oracle_objective(X, y, th, gp.jitter(), prior.sigma, objective));
      }
      double at_fit = oracle_objective(X, y, gp.theta(), gp.jitter(), prior.sigma, objective);
      worst_self = std::max(worst_self, std::abs(at_fit - gp.objective()));
      worst_gap = std::max(worst_gap, grid_max - at_fit);
    }
  }
  return {worst_gap <= 1e-6 && worst_self <= 1e-8,
          fmt("max(grid - fitted) %.2e", worst_gap) + fmt(", reported vs oracle %.2e", worst_self)};
}

Outcome ei_monte_carlo() {
  std::mt19937_64 rng(105);
  std::normal_distribution<double> z(0.0, 1.0);
  const int samples = 1'000'000;
  int cells = 0, ok = 0;
  double worst_z = 0.0;
  for (double gain : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    for (double s : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      double sum = 0.0, sum2 = 0.0;
      for (int i = 0; i < samples; ++i) {
        double g = std::max(gain + s * z(rng), 0.0);
        sum += g;
        sum2 += g * g;
      }
      double mean = sum / samples;
      double se = std::sqrt((sum2 / samples - mean * mean) / samples);
      double diff = std::abs(expected_improvement(1.0 + gain, s * s, 1.0) - mean);
      ++cells;
      if (diff <= 3.0 * se) ++ok;
      worst_z = std::max(worst_z, diff / se);
    }
  }
  return {ok == cells, std::to_string(ok) + "/" + std::to_string(cells) + " cells" + fmt(", worst %.2f SE", worst_z)};
}

Outcome masking_argmax() {
  std::mt19937_64 rng(106);
  int agree = 0, screened_hits = 0;
  for (int inst = 0; inst < 200; ++inst) {
    int m = 1 + static_cast<int>(rng() % 8);
    std::vector<Variant> vs = enumerate_variants(2);
    Eigen::MatrixXd E = oracle::random_matrix(rng, 400, m);
    std::vector<float> vals;
    for (int r = 0; r < 400; ++r)
      for (int c = 0; c < m; ++c) vals.push_back(static_cast<float>(E(r, c)));
    EmbeddingStore store(m, vs, vals);
    std::vector<std::size_t> all(400);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    std::size_t t = 1 + rng() % 10;
    std::vector<std::size_t> screened(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(t));
    Eigen::MatrixXd X = store.gather(screened);
    Eigen::VectorXd y = oracle::random_matrix(rng, static_cast<Eigen::Index>(t), 1, 0.0, 3.0).col(0);
    double theta = prior_draw(rng, std::sqrt(m) / 3.0) + 0.05;
    double j = default_jitter({KernelFamily::Matern32Scaled, theta});
    FittedGP gp(X, y, {KernelFamily::Matern32Scaled, theta}, j);
    double f_best = y.maxCoeff();
    std::vector<std::size_t> cand(400);
    std::iota(cand.begin(), cand.end(), std::size_t{0});
    std::size_t chosen = select_next(gp, store, cand, screened, f_best).chosen;

    std::set<std::size_t> mask(screened.begin(), screened.end());
    std::size_t best_row = 400;
    double best_v = -1.0;
    for (std::size_t r = 0; r < 400; ++r) {
      if (mask.contains(r)) continue;
      auto [mu, var] = oracle::dense_posterior(X, y, theta, j, store.row_vector(r));
      double v = oracle::ei(mu, std::max(var, 0.0), f_best);
      if (v > best_v) {
        best_v = v;
        best_row = r;
      }
    }
    if (chosen == best_row) ++agree;
    if (mask.contains(chosen)) ++screened_hits;
  }

  // Every EI underflows to zero: the lowest unscreened row must be chosen.
  auto store = synth_store(enumerate_variants(2), 8, 3);
  std::vector<std::size_t> screened{0, 1, 2, 5};
  Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
  FittedGP gp(store.gather(screened), y, {KernelFamily::Matern32Scaled, 1.0}, 1e-8);
  std::vector<std::size_t> cand(400);
  std::iota(cand.begin(), cand.end(), std::size_t{0});
  auto fallback = select_next(gp, store, cand, screened, 1e6);
  bool all_zero = std::all_of(fallback.values.begin(), fallback.values.end(), [](double v) { return v == 0.0; });
  bool fallback_ok = all_zero && fallback.chosen == 3;

  return {agree == 200 && screened_hits == 0 && fallback_ok,
          std::to_string(agree) + "/200 match oracle, " + std::to_string(screened_hits) +
              " screened picks, fallback row " + std::to_string(fallback.chosen)};
}

int steps_to(const RunTrace& t, double target, int cap) {
  for (const auto& r : t.records)
    if (r.fitness >= target) return r.step;
  return cap + 1;
}

double median_of(std::vector<int> v) {
  std::vector<double> d(v.begin(), v.end());
  std::sort(d.begin(), d.end());
  return quantile_sorted(d, 0.5);
}

bool smw_clean_sweep(const RunTrace& t, int n) {
  const std::size_t sweep = 1 + 19 * static_cast<std::size_t>(n);
  if (t.records.size() < sweep) return false;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < sweep; ++i)
    if (!seen.insert(t.records[i].variant.word()).second) return false;
  Variant champion = t.records[0].variant;
  double champion_y = t.records[0].fitness;
  std::set<int> positions;
  for (int block = 0; block < n; ++block) {
    Variant parent = champion;
    int pos = -1;
    for (int i = 0; i < 19; ++i) {
      const auto& r = t.records[1 + 19 * static_cast<std::size_t>(block) + static_cast<std::size_t>(i)];
      if (hamming(r.variant, parent) != 1) return false;
      int p = 0;
      while (r.variant[static_cast<std::size_t>(p)] == parent[static_cast<std::size_t>(p)]) ++p;
      if (pos < 0) pos = p;
      if (p != pos) return false;
      if (r.fitness > champion_y) {
        champion = r.variant;
        champion_y = r.fitness;
      }
    }
    positions.insert(pos);
  }
  return static_cast<int>(positions.size()) == n;
}

Outcome end_to_end() {
  auto t0 = std::chrono::steady_clock::now();
  auto store = synth_store(enumerate_variants(2), 32, 2024);
  PlantedOptions po;
  po.seed = 7;
  PlantedLandscape planted = planted_landscape(store, po);
  const Landscape& land = planted.landscape;
  const double top = land.fitness(planted.global_optimum);
  const int locals = static_cast<int>(strict_local_maxima(land, store.variants()).size()) - 1;

  const int runs = 50, cap = 400;
  StartSampling sampling = StartSampling::parse("uniform:50", 99);
  auto starts = sample_starts(sampling, land);
  std::vector<int> boes_steps, random_steps;
  for (int i = 0; i < runs; ++i) {
    RunConfig cfg;
    cfg.budget = cap;
    cfg.start = starts[static_cast<std::size_t>(i)];
    cfg.store_kind = StoreKind::Synthetic;
    cfg.seed = derive_seed(99, static_cast<std::uint64_t>(i));
    cfg.stop_at = top;
    boes_steps.push_back(steps_to(run_boes(cfg, land, store), top, cap));
    random_steps.push_back(steps_to(run_random(land, cap, cfg.seed), top, cap));
  }
  double boes_med = median_of(boes_steps);
  double random_med = median_of(random_steps);

  // Clean-sweep structure on the 400-variant landscape and on a 20^4 space.
  bool smw2 = smw_clean_sweep(run_smw(land, starts[0], 39, 1), 2);
  std::unordered_map<std::uint64_t, double> table;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t i = 0; i < 160000; ++i) table[i] = u(rng);
  Landscape four("random4", 4, {}, Variant::from_word("VDGV"), table);
  RunTrace smw4 = run_smw(four, four.wild_type(), 200, 3);
  bool smw4_ok = smw_clean_sweep(smw4, 4);

  double secs = elapsed_since(t0);
  bool pass = locals >= 3 && boes_med <= 120 && boes_med < random_med && smw2 && smw4_ok && secs < 120.0;
  std::ostringstream d;
  d << "local optima " << locals << ", BOES median " << boes_med << ", random median " << random_med
    << ", SMW sweeps " << (smw2 ? "39" : "bad") << "/" << (smw4_ok ? "77" : "bad") << ", " << fmt("%.1fs", secs);
  return {pass, d.str()};
}

Outcome protocol() {
  auto store = synth_store(enumerate_variants(2), 32, 2024);
  PlantedOptions po;
  po.seed = 7;
  PlantedLandscape planted = planted_landscape(store, po);
  const Landscape& land = planted.landscape;

  SweepSpec spec;
  spec.method = SweepMethod::Boes;
  spec.start_sampling = StartSampling::parse("all", 11);
  spec.budget = 20;
  spec.seed = 11;
  spec.boes.store_kind = StoreKind::Synthetic;
  auto traces = sweep(spec, land, &store);

  bool invariants = traces.size() == 400;
  auto starts = sample_starts(spec.start_sampling, land);
  for (std::size_t i = 0; i < traces.size() && invariants; ++i) {
    const auto& t = traces[i];
    std::set<std::uint64_t> seen;
    double best = 0.0;
    invariants = t.records.size() == 20 && t.records.front().variant == starts[i];
    for (std::size_t k = 0; k < t.records.size() && invariants; ++k) {
      const auto& r = t.records[k];
      best = std::max(best, r.fitness);
      invariants = seen.insert(r.variant.index()).second && r.step == static_cast<int>(k) + 1 &&
                   r.fitness == land.fitness(r.variant) && r.best == best;
    }
  }

  std::vector<int> grid(20);
  std::iota(grid.begin(), grid.end(), 1);
  auto curves = quartile_curves(traces, grid);
  bool monotone = true;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    monotone = monotone && curves[i].q1 >= curves[i - 1].q1 && curves[i].median >= curves[i - 1].median &&
               curves[i].q3 >= curves[i - 1].q3;
  }
  std::vector<int> at{5, 10, 15, 20};
  auto snaps = snapshots(traces, at);
  bool dominance = true;
  for (std::size_t i = 1; i < snaps.size(); ++i)
    for (std::size_t k = 0; k < snaps[i].values.size(); ++k)
      dominance = dominance && snaps[i].values[k] >= snaps[i - 1].values[k];
  bool agree = true;
  for (std::size_t i = 0; i < at.size(); ++i)
    agree = agree && quantile_sorted(snaps[i].values, 0.5) ==
                         curves[static_cast<std::size_t>(at[i] - 1)].median;

  std::ostringstream d;
  d << traces.size() << " runs; invariants " << (invariants ? "ok" : "broken") << ", quartiles "
    << (monotone ? "monotone" : "non-monotone") << ", dominance " << (dominance ? "ok" : "broken")
    << ", snapshot/curve " << (agree ? "agree" : "disagree");
  return {invariants && monotone && dominance && agree, d.str()};
}

Outcome ndcg_check() {
  double worst = 0.0;
  std::vector<double> truth{3, 2, 1}, pred{0, 1, 2};
  int orderings = 0;
  do {
    worst = std::max(worst, std::abs(ndcg(pred, truth) - oracle::ndcg(pred, truth)));
    ++orderings;
  } while (std::next_permutation(pred.begin(), pred.end()));
  std::vector<double> rev{1, 2, 3};
  double hand = (1.0 / 1.0 + 2.0 / std::log2(3.0) + 3.0 / 2.0) / (3.0 / 1.0 + 2.0 / std::log2(3.0) + 1.0 / 2.0);
  worst = std::max(worst, std::abs(ndcg(rev, truth) - hand));

  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  bool invariant = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(20), t(20);
    for (auto& x : p) x = u(rng);
    for (auto& x : t) x = u(rng);
    double v = ndcg(p, t);
    worst = std::max(worst, std::abs(v - oracle::ndcg(p, t)));
    std::vector<double> w(p);
    for (auto& x : w) x = std::atan(x - 5.0) * 4.0 + 1.0;
    invariant = invariant && ndcg(w, t) == v;
  }
  return {orderings == 6 && worst <= 1e-12 && invariant,
          fmt("max abs diff %.2e", worst) + ", transform invariance " + (invariant ? "holds" : "broken")};
}

int call_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "evoboss");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  testutil::TempDir dir("accept_det");
  std::string store = (dir / "emb").string();
  std::string land = (dir / "land").string();
  if (call_cli({"synth-embed", "--n", "2", "--dim", "32", "--seed", "1", "--out", store}) != 0 ||
      call_cli({"synth-landscape", "--store", store, "--seed", "3", "--out", land}) != 0) {
    return {false, "fixture generation failed"};
  }
  int identical = 0, total = 0;
  for (std::string method : {"boes", "smw", "recombination", "random"}) {
    std::vector<std::string> base{"run", "--method", method, "--landscape", land + ".csv", "--store", store,
                                  "--budget", "60", "--seed", "8", "--start", "wild_type", "--out"};
    auto a = base, b = base;
    a.push_back((dir / (method + "_a.jsonl")).string());
    b.push_back((dir / (method + "_b.jsonl")).string());
    if (call_cli(a) != 0 || call_cli(b) != 0) return {false, method + " run failed"};
    ++total;
    if (testutil::read_text(a.back()) == testutil::read_text(b.back())) ++identical;
  }
  for (std::string method : {"boes", "smw"}) {
    std::vector<std::string> base{"sweep", "--method", method, "--landscape", land + ".csv", "--store", store,
                                  "--budget", "15", "--seed", "8", "--runs", "8"};
    auto a = base, b = base, c = base;
    a.insert(a.end(), {"--jobs", "1", "--out-dir", (dir / (method + "_s1")).string()});
    b.insert(b.end(), {"--jobs", "1", "--out-dir", (dir / (method + "_s1b")).string()});
    c.insert(c.end(), {"--jobs", "4", "--out-dir", (dir / (method + "_s4")).string()});
    if (call_cli(a) != 0 || call_cli(b) != 0 || call_cli(c) != 0) return {false, method + " sweep failed"};
    for (std::size_t i = 0; i < 8; ++i) {
      auto name = trace_file_name(i);
      std::string ref = testutil::read_text(dir / (method + "_s1") / name);
      total += 2;
      if (!ref.empty() && ref == testutil::read_text(dir / (method + "_s1b") / name)) ++identical;
      if (!ref.empty() && ref == testutil::read_text(dir / (method + "_s4") / name)) ++identical;
    }
  }
  return {identical == total, std::to_string(identical) + "/" + std::to_string(total) + " file pairs identical"};
}

Outcome gb1_optional() {
  const char* csv = std::getenv("EVOBOSS_GB1_CSV");
  const char* meta = std::getenv("EVOBOSS_GB1_META");
  const char* store_prefix = std::getenv("EVOBOSS_GB1_STORE");
  if (!csv || !meta || !store_prefix) {
    return {false, "set EVOBOSS_GB1_CSV, EVOBOSS_GB1_META and EVOBOSS_GB1_STORE to run", true};
  }
  Landscape land = load_landscape(csv, load_meta(meta));
  std::string prefix(store_prefix);
  EmbeddingStore store = load_store(prefix + ".index", prefix + ".bin");
  RunConfig cfg;
  cfg.budget = 200;
  cfg.start = land.wild_type();
  cfg.stop_at = land.fitness_max();
  RunTrace t = run_boes(cfg, land, store);
  std::ostringstream d;
  d << "best " << t.final_best() << " after " << t.records.size() << " screens (max " << land.fitness_max() << ")";
  return {t.final_best() >= 8.0, d.str()};
}

}  // namespace

int main() {
  report("gp-oracle-equivalence", gp_oracle);
  report("noiseless-interpolation", interpolation);
  report("kernel-psd", kernel_psd);
  report("fit-optimality", fit_optimality);
  report("ei-monte-carlo", ei_monte_carlo);
  report("masking-argmax", masking_argmax);
  report("end-to-end-optimization", end_to_end);
  report("protocol-sweep", protocol);
  report("ndcg", ndcg_check);
  report("determinism", determinism);
  report("gb1-full-data", gb1_optional);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
