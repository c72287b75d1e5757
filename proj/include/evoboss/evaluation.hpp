// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evoboss/boes.hpp"
#include "evoboss/embeddings.hpp"
#include "evoboss/landscape.hpp"
#include "evoboss/trace.hpp"

namespace evoboss {

enum class SweepMethod { Boes, Smw, Recombination, Random, ExternalTraceDir };

std::string to_string(SweepMethod method);
SweepMethod parse_sweep_method(const std::string& text);

struct StartSampling {
  bool all_variants = false;
  int count = 0;  // uniform draw size when !all_variants
  std::uint64_t seed = 0;

  // "all" or "uniform:<R>" (seed taken from the sweep seed).
  static StartSampling parse(const std::string& text, std::uint64_t seed);
};

struct SweepSpec {
  SweepMethod method = SweepMethod::Boes;
  StartSampling start_sampling;
  int budget = 1;
  std::uint64_t seed = 0;
  RunConfig boes;      // template for method=boes; budget, start and seed are overwritten per run
  int top_k = 3;       // recombination
  int jobs = 1;
  std::optional<std::filesystem::path> out_dir;        // trace files are written here when set
  std::optional<std::filesystem::path> external_dir;   // for ExternalTraceDir

  int runs() const;
};

// Start variants for a sweep, in run order.
std::vector<Variant> sample_starts(const StartSampling& sampling, const Landscape& landscape);

// One trace per start, run i seeded with derive_seed(spec.seed, i). Results
// and written files do not depend on spec.jobs. store may be null for
// methods that do not use embeddings.
std::vector<RunTrace> sweep(const SweepSpec& spec, const Landscape& landscape, const EmbeddingStore* store);

std::string trace_file_name(std::size_t run);

// Linear-interpolation empirical quantile of a sorted sample (p in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double p);

struct QuartilePoint {
  int count = 0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

std::vector<QuartilePoint> quartile_curves(const std::vector<RunTrace>& traces, std::span<const int> grid);

struct Snapshot {
  int count = 0;
  std::vector<double> values;  // ascending
};

std::vector<Snapshot> snapshots(const std::vector<RunTrace>& traces, std::span<const int> at);

std::string curves_csv(const std::vector<QuartilePoint>& curves);
std::string snapshots_csv(const std::vector<Snapshot>& snaps);

enum class NdcgGain { Linear, Exponential };

// Normalized discounted cumulative gain of the ranking induced by predicted
// (descending, ties by index) against truth gains, with log2(i + 1) discount.
// An all-zero truth returns 1.
double ndcg(std::span<const double> predicted, std::span<const double> truth,
            NdcgGain gain = NdcgGain::Linear);

}  // namespace evoboss
