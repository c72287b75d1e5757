// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "evoboss/landscape.hpp"
#include "evoboss/trace.hpp"

namespace evoboss {

// Single-mutation walk (greedy coordinate ascent). Positions are visited in a
// seed-shuffled order; at each position all 19 substitutions of the champion
// are screened (already screened ones skipped) and the champion moves to the
// best variant seen so far. Sweeps repeat with a fresh shuffle until the
// budget is spent or a sweep screens nothing new.
RunTrace run_smw(const Landscape& landscape, const Variant& start, int budget, std::uint64_t seed);

// Screens the start and all 19n single mutants, keeps the top_k residues per
// position ranked by single-mutant fitness, and screens the top_k^n
// recombinants in descending order of their summed per-position fitness.
// Requires budget >= 1 + 19n.
RunTrace run_recombination(const Landscape& landscape, const Variant& start, int budget, int top_k,
                           std::uint64_t seed);

// budget distinct variants drawn uniformly without replacement.
RunTrace run_random(const Landscape& landscape, int budget, std::uint64_t seed);

}  // namespace evoboss
