// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "evoboss/embeddings.hpp"
#include "evoboss/gp.hpp"
#include "evoboss/landscape.hpp"
#include "evoboss/trace.hpp"

namespace evoboss {

enum class StoreKind { Embedding, OneHot, Synthetic };

std::string to_string(StoreKind kind);
StoreKind parse_store_kind(const std::string& text);

struct RunConfig {
  int budget = 1;
  Variant start;
  KernelFamily kernel_family = KernelFamily::Matern32Scaled;
  StoreKind store_kind = StoreKind::Embedding;
  int batch = 1;
  // Extra random initial screens besides the start (0 means start only).
  int init_random = 0;
  FitObjective fit_objective = FitObjective::Map;
  // Previous optimum of theta joins the multi-start set.
  bool warm_start = true;
  int starts = 20;
  double rho_end = 1e-4;
  std::uint64_t seed = 0;
  // Ends the run early once the best observed fitness reaches this value.
  std::optional<double> stop_at;

  nlohmann::ordered_json to_json() const;
};

// Bayesian optimization in embedding space. The run screens the start (plus
// init_random random variants), then repeatedly refits the GP on all
// observations and screens the `batch` unscreened variants with the largest
// expected improvement, until the budget or the candidate set is exhausted.
// Every store row is a candidate.
RunTrace run_boes(const RunConfig& config, const Landscape& landscape, const EmbeddingStore& store);

}  // namespace evoboss
