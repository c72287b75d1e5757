// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "evoboss/embeddings.hpp"
#include "evoboss/landscape.hpp"

namespace evoboss {

struct PlantedOptions {
  int local_optima = 3;
  double global_height = 10.0;
  // Heights of the local peaks as fractions of global_height, cycled.
  std::vector<double> local_fractions = {0.65, 0.55, 0.45};
  // Peak width relative to the mean squared distance between single mutants.
  double width_factor = 0.5;
  std::uint64_t seed = 0;
  int max_attempts = 64;
};

struct PlantedLandscape {
  Landscape landscape;
  Variant global_optimum;
  std::vector<Variant> peak_centres;  // global first, then the local peaks
};

// Fitness is a smooth function of the embedding: a sum of Gaussian bumps
// centred on the embeddings of a few well separated variants, one of them
// higher than the rest. Every store row is measured. Centres are re-drawn
// until the global optimum is unique and at least local_optima other variants
// are strict local maxima under single substitutions.
PlantedLandscape planted_landscape(const EmbeddingStore& store, const PlantedOptions& options = {});

// Variants (from the given set, all measured) whose fitness is strictly greater
// than every single-substitution neighbour.
std::vector<Variant> strict_local_maxima(const Landscape& landscape, const std::vector<Variant>& variants);

}  // namespace evoboss
