// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "evoboss/variant.hpp"

namespace evoboss {

// Dense per-variant embedding vectors, stored as 32-bit reals row-major to
// match the on-disk format. Immutable after construction.
class EmbeddingStore {
 public:
  EmbeddingStore(int dim, std::vector<Variant> variants, std::vector<float> values);

  int dim() const { return dim_; }
  std::size_t count() const { return variants_.size(); }
  const std::vector<Variant>& variants() const { return variants_; }
  const Variant& variant(std::size_t row) const { return variants_[row]; }

  std::span<const float> row(std::size_t r) const {
    return {values_.data() + r * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  Eigen::VectorXd row_vector(std::size_t r) const;

  std::optional<std::size_t> find(const Variant& v) const;
  // Throws std::out_of_range when v has no row.
  std::size_t row_of(const Variant& v) const;

  // Selected rows as a dense double matrix (one row per entry of rows).
  Eigen::MatrixXd gather(std::span<const std::size_t> rows) const;
  Eigen::MatrixXd to_matrix() const;

  const std::vector<float>& values() const { return values_; }

 private:
  int dim_;
  std::vector<Variant> variants_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary matrix file: magic "EMBSTOR1", u32 LE count, u32 LE dim, then
// count*dim float32 LE row-major. Index file: one variant word per line.
inline constexpr char kStoreMagic[8] = {'E', 'M', 'B', 'S', 'T', 'O', 'R', '1'};

EmbeddingStore load_store(const std::filesystem::path& index_path,
                          const std::filesystem::path& matrix_path);
EmbeddingStore parse_store(std::string_view index_text, std::string_view matrix_bytes);
void write_store(const EmbeddingStore& store, const std::filesystem::path& index_path,
                 const std::filesystem::path& matrix_path);
std::string encode_matrix(const EmbeddingStore& store);

// Desk-scale stand-in for language-model embeddings: the embedding of a word
// is (1/sqrt(n)) * sum over positions p of b(p, residue_p), where each b is a
// unit-variance Gaussian vector drawn from a counter-based generator keyed by
// (seed, p, residue). Variants sharing more residues lie closer together.
EmbeddingStore synth_store(const std::vector<Variant>& variants, int dim, std::uint64_t seed);

// One block of 20 indicator entries per position; m = 20n.
EmbeddingStore onehot_store(const std::vector<Variant>& variants);

struct PcaResult {
  Eigen::MatrixXd projection;                // N x k
  Eigen::VectorXd explained_variance_ratio;  // k
  Eigen::MatrixXd components;                // m x k, unit columns
};

// Principal components of the mean-centred rows, ordered by descending
// variance. Each component's largest-magnitude entry is made positive.
PcaResult pca(const EmbeddingStore& store, int k);
PcaResult pca(const Eigen::MatrixXd& data, int k);

}  // namespace evoboss
