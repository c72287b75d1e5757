// SPDX-License-Identifier: Apache-2.0
#include "evoboss/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evoboss/rng.hpp"

namespace evoboss {

std::vector<Variant> strict_local_maxima(const Landscape& landscape, const std::vector<Variant>& variants) {
  std::vector<Variant> out;
  for (const auto& v : variants) {
    double y = landscape.fitness(v);
    bool is_max = true;
    for (int p = 0; p < v.length() && is_max; ++p) {
      for (const auto& nb : single_mutants(v, p)) {
        if (landscape.fitness(nb) >= y) {
          is_max = false;
          break;
        }
      }
    }
    if (is_max) out.push_back(v);
  }
  return out;
}

PlantedLandscape planted_landscape(const EmbeddingStore& store, const PlantedOptions& options) {
  if (store.count() < 2) throw std::invalid_argument("planted_landscape: store too small");
  if (options.local_fractions.empty()) throw std::invalid_argument("planted_landscape: no local heights");
  const int n = store.variant(0).length();
  const Eigen::MatrixXd X = store.to_matrix();
  const auto rows = static_cast<Eigen::Index>(store.count());

  // Typical squared distance between variants one substitution apart.
  double single_sq = 0.0;
  int pairs = 0;
  for (std::size_t r = 0; r < store.count() && pairs < 2000; ++r) {
    for (int p = 0; p < n && pairs < 2000; ++p) {
      auto nb = store.find(single_mutants(store.variant(r), p).front());
      if (!nb) continue;
      single_sq += (X.row(static_cast<Eigen::Index>(r)) - X.row(static_cast<Eigen::Index>(*nb))).squaredNorm();
      ++pairs;
    }
  }
  if (pairs == 0) throw std::invalid_argument("planted_landscape: store has no single-mutant pairs");
  const double width_sq = options.width_factor * single_sq / pairs;

  Rng rng(options.seed);
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    // Centres pairwise differ at every position so the peaks are well separated.
    std::vector<std::size_t> centres;
    int guard = 0;
    while (static_cast<int>(centres.size()) < options.local_optima + 1 && guard++ < 10000) {
      auto r = static_cast<std::size_t>(rng.below(store.count()));
      bool far = std::all_of(centres.begin(), centres.end(), [&](std::size_t c) {
        return hamming(store.variant(c), store.variant(r)) == n;
      });
      if (far) centres.push_back(r);
    }
    if (static_cast<int>(centres.size()) < options.local_optima + 1) continue;

    std::vector<double> heights{options.global_height};
    for (int j = 0; j < options.local_optima; ++j) {
      heights.push_back(options.global_height *
                        options.local_fractions[static_cast<std::size_t>(j) % options.local_fractions.size()]);
    }
    std::unordered_map<std::uint64_t, double> measured;
    for (Eigen::Index r = 0; r < rows; ++r) {
      double y = 0.0;
      for (std::size_t j = 0; j < centres.size(); ++j) {
        double sq = (X.row(r) - X.row(static_cast<Eigen::Index>(centres[j]))).squaredNorm();
        y += heights[j] * std::exp(-0.5 * sq / width_sq);
      }
      measured.emplace(store.variant(static_cast<std::size_t>(r)).index(), y);
    }
    const Variant& top = store.variant(centres.front());
    // The wild type is an arbitrary non-optimal row.
    std::size_t wt_row = static_cast<std::size_t>(rng.below(store.count() - 1));
    if (wt_row >= centres.front()) ++wt_row;
    Landscape landscape("planted", n, {}, store.variant(wt_row), std::move(measured));

    // Unique global maximum at the first centre.
    double top_y = landscape.fitness(top);
    bool unique = true;
    for (const auto& v : store.variants()) {
      if (!(v == top) && landscape.fitness(v) >= top_y) {
        unique = false;
        break;
      }
    }
    if (!unique) continue;
    auto maxima = strict_local_maxima(landscape, store.variants());
    if (static_cast<int>(maxima.size()) < options.local_optima + 1) continue;

    PlantedLandscape out{std::move(landscape), top, {}};
    for (auto c : centres) out.peak_centres.push_back(store.variant(c));
    return out;
  }
  throw std::runtime_error("planted_landscape: could not place peaks; try another seed or width");
}

}  // namespace evoboss
