// SPDX-License-Identifier: Apache-2.0
#include "evoboss/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "evoboss/errors.hpp"
#include "evoboss/rng.hpp"

namespace evoboss {

EmbeddingStore::EmbeddingStore(int dim, std::vector<Variant> variants, std::vector<float> values)
    : dim_(dim), variants_(std::move(variants)), values_(std::move(values)) {
  if (dim_ < 1) throw DataError("embedding dimension must be positive");
  if (values_.size() != variants_.size() * static_cast<std::size_t>(dim_)) {
    throw DataError("embedding matrix size does not match count * dim");
  }
  for (float x : values_) {
    if (!std::isfinite(x)) throw DataError("embedding contains non-finite values");
  }
  index_.reserve(variants_.size());
  for (std::size_t r = 0; r < variants_.size(); ++r) {
    if (!index_.emplace(variants_[r].word(), r).second) {
      throw DataError("duplicate variant in embedding index: " + variants_[r].word());
    }
  }
}

Eigen::VectorXd EmbeddingStore::row_vector(std::size_t r) const {
  auto src = row(r);
  Eigen::VectorXd v(dim_);
  for (int j = 0; j < dim_; ++j) v[j] = src[static_cast<std::size_t>(j)];
  return v;
}

std::optional<std::size_t> EmbeddingStore::find(const Variant& v) const {
  auto it = index_.find(v.word());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t EmbeddingStore::row_of(const Variant& v) const {
  auto r = find(v);
  if (!r) throw std::out_of_range("variant not in embedding store: " + v.word());
  return *r;
}

Eigen::MatrixXd EmbeddingStore::gather(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    for (int j = 0; j < dim_; ++j) out(static_cast<Eigen::Index>(i), j) = src[static_cast<std::size_t>(j)];
  }
  return out;
}

Eigen::MatrixXd EmbeddingStore::to_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count()), dim_);
  for (std::size_t i = 0; i < count(); ++i) {
    auto src = row(i);
    for (int j = 0; j < dim_; ++j) out(static_cast<Eigen::Index>(i), j) = src[static_cast<std::size_t>(j)];
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFFU));
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

EmbeddingStore parse_store(std::string_view index_text, std::string_view matrix_bytes) {
  constexpr std::size_t kHeader = 16;
  if (matrix_bytes.size() < kHeader || std::memcmp(matrix_bytes.data(), kStoreMagic, 8) != 0) {
    throw DataError("embedding matrix: bad magic");
  }
  auto bytes = reinterpret_cast<const unsigned char*>(matrix_bytes.data());
  std::uint32_t count = read_u32_le(bytes + 8);
  std::uint32_t dim = read_u32_le(bytes + 12);
  if (dim == 0) throw DataError("embedding matrix: zero dimension");

  std::vector<Variant> variants;
  std::size_t start = 0;
  while (start < index_text.size()) {
    auto end = index_text.find('\n', start);
    auto line = index_text.substr(start, end == std::string_view::npos ? index_text.npos : end - start);
    start = end == std::string_view::npos ? index_text.size() : end + 1;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;
    variants.push_back(Variant::from_word(line));
  }
  if (variants.size() != count) {
    throw DataError("embedding index has " + std::to_string(variants.size()) +
                    " rows but matrix header declares " + std::to_string(count));
  }
  std::size_t expected = kHeader + static_cast<std::size_t>(count) * dim * 4;
  if (matrix_bytes.size() < expected) throw DataError("embedding matrix truncated");
  if (matrix_bytes.size() > expected) throw DataError("embedding matrix has trailing bytes");

  std::vector<float> values(static_cast<std::size_t>(count) * dim);
  const unsigned char* p = bytes + kHeader;
  for (std::size_t i = 0; i < values.size(); ++i, p += 4) {
    values[i] = std::bit_cast<float>(read_u32_le(p));
  }
  return EmbeddingStore(static_cast<int>(dim), std::move(variants), std::move(values));
}

EmbeddingStore load_store(const std::filesystem::path& index_path,
                          const std::filesystem::path& matrix_path) {
  return parse_store(slurp(index_path), slurp(matrix_path));
}

std::string encode_matrix(const EmbeddingStore& store) {
  std::string out(kStoreMagic, 8);
  append_u32_le(out, static_cast<std::uint32_t>(store.count()));
  append_u32_le(out, static_cast<std::uint32_t>(store.dim()));
  out.reserve(out.size() + store.values().size() * 4);
  for (float x : store.values()) append_u32_le(out, std::bit_cast<std::uint32_t>(x));
  return out;
}

void write_store(const EmbeddingStore& store, const std::filesystem::path& index_path,
                 const std::filesystem::path& matrix_path) {
  {
    std::ofstream out(index_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + index_path.string());
    for (const auto& v : store.variants()) out << v.word() << '\n';
  }
  std::ofstream out(matrix_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + matrix_path.string());
  auto bytes = encode_matrix(store);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------

EmbeddingStore synth_store(const std::vector<Variant>& variants, int dim, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("synth_store: dim must be at least 2");
  std::vector<float> values;
  values.reserve(variants.size() * static_cast<std::size_t>(dim));
  std::vector<double> acc(static_cast<std::size_t>(dim));
  for (const auto& v : variants) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int p = 0; p < v.length(); ++p) {
      auto residue = static_cast<std::uint64_t>(residue_rank(v[static_cast<std::size_t>(p)]));
      for (int j = 0; j < dim; ++j) {
        acc[static_cast<std::size_t>(j)] +=
            counter_normal(seed, static_cast<std::uint64_t>(p), residue, static_cast<std::uint64_t>(j));
      }
    }
    double scale = 1.0 / std::sqrt(static_cast<double>(v.length()));
    for (double a : acc) values.push_back(static_cast<float>(a * scale));
  }
  return EmbeddingStore(dim, variants, std::move(values));
}

EmbeddingStore onehot_store(const std::vector<Variant>& variants) {
  int n = variants.empty() ? 1 : variants.front().length();
  int dim = kAlphabetSize * n;
  std::vector<float> values(variants.size() * static_cast<std::size_t>(dim), 0.0f);
  for (std::size_t r = 0; r < variants.size(); ++r) {
    if (variants[r].length() != n) throw std::invalid_argument("onehot_store: mixed variant lengths");
    for (int p = 0; p < n; ++p) {
      int col = p * kAlphabetSize + residue_rank(variants[r][static_cast<std::size_t>(p)]);
      values[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(col)] = 1.0f;
    }
  }
  return EmbeddingStore(dim, variants, std::move(values));
}

// ---------------------------------------------------------------------------

PcaResult pca(const EmbeddingStore& store, int k) { return pca(store.to_matrix(), k); }

PcaResult pca(const Eigen::MatrixXd& data, int k) {
  const Eigen::Index n = data.rows();
  const Eigen::Index m = data.cols();
  if (n < 2) throw std::invalid_argument("pca: need at least two rows");
  if (k < 1 || k > std::min(n, m)) throw std::invalid_argument("pca: k out of range");

  Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const double denom = static_cast<double>(n - 1);

  PcaResult result;
  result.projection = Eigen::MatrixXd::Zero(n, k);
  result.explained_variance_ratio = Eigen::VectorXd::Zero(k);
  result.components = Eigen::MatrixXd::Zero(m, k);

  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd directions;  // m x k in feature space
  double total = 0.0;
  if (m <= n) {
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    total = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    eigenvalues = solver.eigenvalues().reverse().head(k);
    directions = solver.eigenvectors().rowwise().reverse().leftCols(k);
  } else {
    // Gram route: same non-zero spectrum, cheaper when rows are fewer than columns.
    Eigen::MatrixXd gram = (centered * centered.transpose()) / denom;
    total = gram.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    eigenvalues = solver.eigenvalues().reverse().head(k);
    Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse().leftCols(k);
    directions = Eigen::MatrixXd::Zero(m, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::VectorXd v = centered.transpose() * u.col(c);
      double norm = v.norm();
      if (norm > 0.0) directions.col(c) = v / norm;
    }
  }
  if (!(total > 0.0)) return result;

  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index arg = 0;
    directions.col(c).cwiseAbs().maxCoeff(&arg);
    if (directions(arg, c) < 0.0) directions.col(c) *= -1.0;
    result.explained_variance_ratio[c] = std::max(eigenvalues[c], 0.0) / total;
  }
  result.components = directions;
  result.projection = centered * directions;
  return result;
}

}  // namespace evoboss
