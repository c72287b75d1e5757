// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evoboss/trace.hpp"
#include "evoboss/variant.hpp"

namespace evoboss {

// Sidecar metadata: `key=value` lines with name, n, positions, wild_type.
struct LandscapeMeta {
  std::string name;
  int n = 0;
  std::vector<std::string> position_labels;
  std::string wild_type;
};

LandscapeMeta load_meta(const std::filesystem::path& path);
void write_meta(const std::filesystem::path& path, const LandscapeMeta& meta);

// Measured fitness table over the 20^n space. Unmeasured variants have
// fitness exactly zero. Immutable after construction.
class Landscape {
 public:
  Landscape(std::string name, int n, std::vector<std::string> position_labels, Variant wild_type,
            std::unordered_map<std::uint64_t, double> measured);

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  const std::vector<std::string>& position_labels() const { return position_labels_; }
  const Variant& wild_type() const { return wild_type_; }
  double fitness_max() const { return fitness_max_; }
  std::size_t measured_count() const { return measured_.size(); }
  std::uint64_t space_size() const;

  double fitness(const Variant& v) const;
  bool is_measured(const Variant& v) const;

  // Measured (variant, fitness) pairs ordered by variant index.
  std::vector<std::pair<Variant, double>> measured_sorted() const;

 private:
  std::string name_;
  int n_;
  std::vector<std::string> position_labels_;
  Variant wild_type_;
  std::unordered_map<std::uint64_t, double> measured_;
  double fitness_max_ = 0.0;
};

// Reads the `variant,fitness` CSV. Without metadata the wild type defaults to
// the first data row, the name to the file stem and labels to 1..n.
Landscape load_landscape(const std::filesystem::path& csv_path, int n,
                         const std::optional<LandscapeMeta>& meta = std::nullopt);
Landscape load_landscape(const std::filesystem::path& csv_path, const LandscapeMeta& meta);
Landscape parse_landscape_csv(std::string_view text, int n, const std::optional<LandscapeMeta>& meta,
                              const std::string& default_name = "landscape");

std::string to_csv(const Landscape& landscape);
void write_landscape(const std::filesystem::path& csv_path, const Landscape& landscape);

// All 20^n variants in index order. Requires 1 <= n <= 7.
std::vector<Variant> enumerate_variants(int n);

// The 19 variants that differ from v exactly at `position`, in alphabet order.
std::vector<Variant> single_mutants(const Variant& v, int position);

// Budget-enforcing screening oracle for one run. Single owner.
class ScreeningSession {
 public:
  ScreeningSession(const Landscape& landscape, int budget);

  // Throws BudgetExhausted or DuplicateScreen.
  double screen(const Variant& v, std::optional<double> theta = std::nullopt);

  bool contains(const Variant& v) const { return screened_.contains(v.index()); }
  bool exhausted() const { return count() >= budget_; }
  int count() const { return static_cast<int>(trace_.records.size()); }
  int budget() const { return budget_; }
  int remaining() const { return budget_ - count(); }
  double best() const { return trace_.final_best(); }
  const Landscape& landscape() const { return *landscape_; }

  const RunTrace& trace() const { return trace_; }
  RunTrace& trace() { return trace_; }
  RunTrace take_trace() { return std::move(trace_); }

 private:
  const Landscape* landscape_;
  int budget_;
  std::unordered_set<std::uint64_t> screened_;
  RunTrace trace_;
};

}  // namespace evoboss
