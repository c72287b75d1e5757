// SPDX-License-Identifier: Apache-2.0
#include "evoboss/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "evoboss/rng.hpp"

namespace evoboss {

namespace {

void stamp(RunTrace& trace, const char* method, const Landscape& landscape, int budget,
           std::uint64_t seed) {
  trace.config["method"] = method;
  trace.config["landscape"] = landscape.name();
  trace.config["budget"] = budget;
  trace.config["seed"] = seed;
  trace.seed = seed;
}

}  // namespace

RunTrace run_smw(const Landscape& landscape, const Variant& start, int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (start.length() != landscape.n()) throw std::invalid_argument("start length does not match landscape");
  ScreeningSession session(landscape, budget);
  stamp(session.trace(), "smw", landscape, budget, seed);
  session.trace().config["start"] = start.word();

  Rng rng(seed);
  Variant champion = start;
  double champion_fitness = session.screen(start);
  std::vector<int> order(static_cast<std::size_t>(landscape.n()));

  while (!session.exhausted()) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    int screened_this_sweep = 0;
    for (int position : order) {
      for (const Variant& mutant : single_mutants(champion, position)) {
        if (session.exhausted()) break;
        if (session.contains(mutant)) continue;
        double y = session.screen(mutant);
        ++screened_this_sweep;
        if (y > champion_fitness) {
          champion = mutant;
          champion_fitness = y;
        }
      }
      if (session.exhausted()) break;
    }
    if (screened_this_sweep == 0) break;
  }
  return session.take_trace();
}

RunTrace run_recombination(const Landscape& landscape, const Variant& start, int budget, int top_k,
                           std::uint64_t seed) {
  const int n = landscape.n();
  if (start.length() != n) throw std::invalid_argument("start length does not match landscape");
  if (top_k < 1 || top_k > kAlphabetSize) throw std::invalid_argument("top_k must be in [1, 20]");
  if (budget < 1 + (kAlphabetSize - 1) * n) {
    throw std::invalid_argument("recombination needs budget >= 1 + 19n for the single-mutant stage");
  }
  ScreeningSession session(landscape, budget);
  stamp(session.trace(), "recombination", landscape, budget, seed);
  session.trace().config["start"] = start.word();
  session.trace().config["top_k"] = top_k;

  // score[p][a]: observed fitness of the single mutant with residue a at p.
  std::vector<std::array<double, kAlphabetSize>> score(static_cast<std::size_t>(n));
  double start_fitness = session.screen(start);
  for (int p = 0; p < n; ++p) {
    score[static_cast<std::size_t>(p)][static_cast<std::size_t>(residue_rank(start[static_cast<std::size_t>(p)]))] =
        start_fitness;
    for (const Variant& mutant : single_mutants(start, p)) {
      double y = session.screen(mutant);
      score[static_cast<std::size_t>(p)][static_cast<std::size_t>(residue_rank(mutant[static_cast<std::size_t>(p)]))] = y;
    }
  }

  // Per position: residue ranks sorted by descending score, ties by alphabet order.
  std::vector<std::vector<int>> kept(static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    std::vector<int> ranks(kAlphabetSize);
    std::iota(ranks.begin(), ranks.end(), 0);
    const auto& s = score[static_cast<std::size_t>(p)];
    std::stable_sort(ranks.begin(), ranks.end(), [&](int a, int b) {
      return s[static_cast<std::size_t>(a)] > s[static_cast<std::size_t>(b)];
    });
    ranks.resize(static_cast<std::size_t>(top_k));
    kept[static_cast<std::size_t>(p)] = ranks;
  }

  struct Recombinant {
    double total;
    Variant variant;
  };
  std::vector<Recombinant> pool;
  std::vector<int> digit(static_cast<std::size_t>(n), 0);
  while (true) {
    std::string word(static_cast<std::size_t>(n), 'A');
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
      int rank = kept[static_cast<std::size_t>(p)][static_cast<std::size_t>(digit[static_cast<std::size_t>(p)])];
      word[static_cast<std::size_t>(p)] = kAlphabet[static_cast<std::size_t>(rank)];
      total += score[static_cast<std::size_t>(p)][static_cast<std::size_t>(rank)];
    }
    pool.push_back({total, Variant::from_word(word)});
    int p = n - 1;
    while (p >= 0 && ++digit[static_cast<std::size_t>(p)] == top_k) digit[static_cast<std::size_t>(p--)] = 0;
    if (p < 0) break;
  }
  std::stable_sort(pool.begin(), pool.end(), [](const Recombinant& a, const Recombinant& b) {
    return a.total > b.total || (a.total == b.total && a.variant.index() < b.variant.index());
  });
  for (const auto& r : pool) {
    if (session.exhausted()) break;
    if (session.contains(r.variant)) continue;
    session.screen(r.variant);
  }
  return session.take_trace();
}

RunTrace run_random(const Landscape& landscape, int budget, std::uint64_t seed) {
  const std::uint64_t size = landscape.space_size();
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  if (static_cast<std::uint64_t>(budget) > size) throw std::invalid_argument("budget exceeds the space size");
  ScreeningSession session(landscape, budget);
  stamp(session.trace(), "random", landscape, budget, seed);

  // Sparse Fisher-Yates over [0, size): swapped-out slots live in a map.
  Rng rng(seed);
  std::unordered_map<std::uint64_t, std::uint64_t> moved;
  auto slot = [&](std::uint64_t i) {
    auto it = moved.find(i);
    return it == moved.end() ? i : it->second;
  };
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(budget); ++i) {
    std::uint64_t j = i + rng.below(size - i);
    std::uint64_t pick = slot(j);
    moved[j] = slot(i);
    session.screen(Variant::from_index(pick, landscape.n()));
  }
  return session.take_trace();
}

}  // namespace evoboss
