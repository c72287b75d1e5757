// SPDX-License-Identifier: Apache-2.0
#include "evoboss/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "evoboss/baselines.hpp"
#include "evoboss/errors.hpp"
#include "evoboss/rng.hpp"

namespace evoboss {

std::string to_string(SweepMethod method) {
  switch (method) {
    case SweepMethod::Boes: return "boes";
    case SweepMethod::Smw: return "smw";
    case SweepMethod::Recombination: return "recombination";
    case SweepMethod::Random: return "random";
    case SweepMethod::ExternalTraceDir: return "external";
  }
  return "boes";
}

SweepMethod parse_sweep_method(const std::string& text) {
  if (text == "boes") return SweepMethod::Boes;
  if (text == "smw") return SweepMethod::Smw;
  if (text == "recombination") return SweepMethod::Recombination;
  if (text == "random") return SweepMethod::Random;
  if (text == "external") return SweepMethod::ExternalTraceDir;
  throw std::invalid_argument("unknown method: " + text);
}

StartSampling StartSampling::parse(const std::string& text, std::uint64_t seed) {
  StartSampling s;
  s.seed = seed;
  if (text == "all" || text == "all_variants") {
    s.all_variants = true;
    return s;
  }
  constexpr std::string_view prefix = "uniform:";
  if (text.starts_with(prefix)) {
    auto digits = std::string_view(text).substr(prefix.size());
    int count = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && count >= 1) {
      s.count = count;
      return s;
    }
  }
  throw std::invalid_argument("start sampling must be 'all' or 'uniform:<R>' with R >= 1");
}

int SweepSpec::runs() const { return start_sampling.all_variants ? -1 : start_sampling.count; }

std::vector<Variant> sample_starts(const StartSampling& sampling, const Landscape& landscape) {
  const std::uint64_t size = landscape.space_size();
  std::vector<Variant> starts;
  if (sampling.all_variants) {
    if (size > 200'000'000ULL) throw std::invalid_argument("start_sampling=all: space too large");
    starts.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) starts.push_back(Variant::from_index(i, landscape.n()));
    return starts;
  }
  if (sampling.count < 1) throw std::invalid_argument("runs must be at least 1");
  if (static_cast<std::uint64_t>(sampling.count) > size) {
    throw std::invalid_argument("more runs requested than variants in the space");
  }
  Rng rng(derive_seed(sampling.seed, 0x5747a27));
  std::unordered_map<std::uint64_t, std::uint64_t> moved;
  auto slot = [&](std::uint64_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(sampling.count); ++i) {
    std::uint64_t j = i + rng.below(size - i);
    std::uint64_t pick = slot(j);
    moved[j] = slot(i);
    starts.push_back(Variant::from_index(pick, landscape.n()));
  }
  return starts;
}

std::string trace_file_name(std::size_t run) {
  std::string digits = std::to_string(run);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "run_" + digits + ".jsonl";
}

std::vector<RunTrace> sweep(const SweepSpec& spec, const Landscape& landscape, const EmbeddingStore* store) {
  if (spec.method == SweepMethod::ExternalTraceDir) {
    if (!spec.external_dir) throw std::invalid_argument("external sweep needs a trace directory");
    return read_trace_dir(*spec.external_dir);
  }
  if (spec.method == SweepMethod::Boes && store == nullptr) {
    throw std::invalid_argument("boes sweep needs an embedding store");
  }
  const std::vector<Variant> starts = sample_starts(spec.start_sampling, landscape);
  if (spec.out_dir) std::filesystem::create_directories(*spec.out_dir);

  std::vector<RunTrace> traces(starts.size());
  auto run_one = [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(spec.seed, i);
    RunTrace trace;
    switch (spec.method) {
      case SweepMethod::Boes: {
        RunConfig config = spec.boes;
        config.budget = spec.budget;
        config.start = starts[i];
        config.seed = seed;
        trace = run_boes(config, landscape, *store);
        break;
      }
      case SweepMethod::Smw:
        trace = run_smw(landscape, starts[i], spec.budget, seed);
        break;
      case SweepMethod::Recombination:
        trace = run_recombination(landscape, starts[i], spec.budget, spec.top_k, seed);
        break;
      case SweepMethod::Random:
        trace = run_random(landscape, spec.budget, seed);
        break;
      case SweepMethod::ExternalTraceDir:
        break;
    }
    trace.config["run"] = i;
    if (spec.out_dir) write_trace(*spec.out_dir / trace_file_name(i), trace);
    traces[i] = std::move(trace);
  };

  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(spec.jobs, 1)), 1,
                                                   std::max<std::size_t>(starts.size(), 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run_one(i);
    return traces;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= starts.size()) return;
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = starts.size();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return traces;
}

// ---------------------------------------------------------------------------

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<Snapshot> snapshots(const std::vector<RunTrace>& traces, std::span<const int> at) {
  if (traces.empty()) throw std::invalid_argument("no traces");
  std::vector<Snapshot> out;
  out.reserve(at.size());
  for (int count : at) {
    if (count < 1) throw std::invalid_argument("screen counts must be positive");
    Snapshot s{count, {}};
    s.values.reserve(traces.size());
    for (const auto& t : traces) {
      if (t.records.empty()) throw std::invalid_argument("empty trace");
      s.values.push_back(t.best_at(static_cast<std::size_t>(count)));
    }
    std::sort(s.values.begin(), s.values.end());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<QuartilePoint> quartile_curves(const std::vector<RunTrace>& traces, std::span<const int> grid) {
  std::vector<QuartilePoint> out;
  for (const auto& s : snapshots(traces, grid)) {
    out.push_back({s.count, quantile_sorted(s.values, 0.25), quantile_sorted(s.values, 0.5),
                   quantile_sorted(s.values, 0.75)});
  }
  return out;
}

namespace {

std::string fmt(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

}  // namespace

std::string curves_csv(const std::vector<QuartilePoint>& curves) {
  std::string out = "count,q1,median,q3\n";
  for (const auto& c : curves) {
    out += std::to_string(c.count) + "," + fmt(c.q1) + "," + fmt(c.median) + "," + fmt(c.q3) + "\n";
  }
  return out;
}

std::string snapshots_csv(const std::vector<Snapshot>& snaps) {
  std::string out = "count,value\n";
  for (const auto& s : snaps) {
    for (double v : s.values) out += std::to_string(s.count) + "," + fmt(v) + "\n";
  }
  return out;
}

double ndcg(std::span<const double> predicted, std::span<const double> truth, NdcgGain gain) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("ndcg: length mismatch");
  for (double t : truth) {
    if (!(t >= 0.0)) throw std::invalid_argument("ndcg: truth must be non-negative");
  }
  auto g = [gain](double rel) { return gain == NdcgGain::Linear ? rel : std::exp2(rel) - 1.0; };

  std::vector<std::size_t> order(predicted.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predicted[a] > predicted[b]; });
  std::vector<double> ideal(truth.begin(), truth.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  double dcg = 0.0;
  double idcg = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += g(truth[order[i]]) / discount;
    idcg += g(ideal[i]) / discount;
  }
  if (!(idcg > 0.0)) return 1.0;
  return dcg / idcg;
}

}  // namespace evoboss
