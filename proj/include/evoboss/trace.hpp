// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "evoboss/variant.hpp"

namespace evoboss {

struct TraceRecord {
  int step = 0;  // 1-based screen count
  Variant variant;
  double fitness = 0.0;
  double best = 0.0;  // running maximum of fitness up to and including this step
  std::optional<double> theta;  // fitted scale used to pick this variant; absent for init screens

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Ordered record of one directed-evolution run.
struct RunTrace {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;

  double final_best() const { return records.empty() ? 0.0 : records.back().best; }

  // Best-so-far after `count` screens; shorter traces are right-extended with
  // their final best.
  double best_at(std::size_t count) const;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

// JSON-lines serialization: a header line {"config":..., "seed":...} followed
// by one {"step","variant","fitness","best","theta"} object per screen.
std::string to_jsonl(const RunTrace& trace);
RunTrace from_jsonl(std::string_view text);

void write_trace(const std::filesystem::path& path, const RunTrace& trace);
RunTrace read_trace(const std::filesystem::path& path);

// Every *.jsonl file in dir, sorted by file name.
std::vector<RunTrace> read_trace_dir(const std::filesystem::path& dir);

}  // namespace evoboss
