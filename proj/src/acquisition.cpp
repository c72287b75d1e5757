// SPDX-License-Identifier: Apache-2.0
#include "evoboss/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "evoboss/errors.hpp"

namespace evoboss {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mu, double var, double f_best) {
  double s = std::sqrt(std::max(var, 0.0));
  double gain = mu - f_best;
  if (!(s > 0.0)) return std::max(gain, 0.0);
  double z = gain / s;
  return std::max(gain * normal_cdf(z) + s * normal_pdf(z), 0.0);
}

namespace {

std::vector<double> masked_values(std::span<const std::size_t> candidates, const Eigen::VectorXd& mean,
                                  const Eigen::VectorXd& variance, const std::vector<bool>& screened,
                                  double f_best) {
  if (mean.size() != static_cast<Eigen::Index>(candidates.size()) || variance.size() != mean.size()) {
    throw std::invalid_argument("posterior arrays do not match candidates");
  }
  std::vector<double> values(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t row = candidates[i];
    bool masked = row < screened.size() && screened[row];
    auto idx = static_cast<Eigen::Index>(i);
    values[i] = masked ? 0.0 : expected_improvement(mean[idx], variance[idx], f_best);
  }
  return values;
}

bool is_screened(const std::vector<bool>& screened, std::size_t row) {
  return row < screened.size() && screened[row];
}

std::vector<bool> mask_from(std::span<const std::size_t> screened, std::span<const std::size_t> candidates) {
  std::size_t size = 0;
  for (auto r : candidates) size = std::max(size, r + 1);
  for (auto r : screened) size = std::max(size, r + 1);
  std::vector<bool> mask(size, false);
  for (auto r : screened) mask[r] = true;
  return mask;
}

}  // namespace

AcquisitionResult select_from_posteriors(std::span<const std::size_t> candidates,
                                         const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                                         const std::vector<bool>& screened, double f_best) {
  if (candidates.empty()) throw std::invalid_argument("select_next: no candidates");
  AcquisitionResult result;
  result.values = masked_values(candidates, mean, variance, screened, f_best);

  bool found = false;
  double best_value = 0.0;
  std::size_t best_row = 0;
  std::size_t fallback = 0;
  bool have_fallback = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::size_t row = candidates[i];
    if (is_screened(screened, row)) continue;
    if (!have_fallback || row < fallback) {
      fallback = row;
      have_fallback = true;
    }
    double v = result.values[i];
    if (v > 0.0 && (!found || v > best_value || (v == best_value && row < best_row))) {
      found = true;
      best_value = v;
      best_row = row;
    }
  }
  if (!have_fallback) throw SearchSpaceExhausted();
  result.chosen = found ? best_row : fallback;
  return result;
}

std::vector<std::size_t> top_q_from_posteriors(std::span<const std::size_t> candidates,
                                               const Eigen::VectorXd& mean,
                                               const Eigen::VectorXd& variance,
                                               const std::vector<bool>& screened, double f_best,
                                               std::size_t q) {
  if (q == 0) throw std::invalid_argument("select_batch: q must be positive");
  auto values = masked_values(candidates, mean, variance, screened, f_best);
  std::vector<std::pair<double, std::size_t>> open;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!is_screened(screened, candidates[i])) open.emplace_back(values[i], candidates[i]);
  }
  if (open.size() < q) throw SearchSpaceExhausted();
  auto order = [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  };
  std::partial_sort(open.begin(), open.begin() + static_cast<std::ptrdiff_t>(q), open.end(), order);
  std::vector<std::size_t> rows;
  rows.reserve(q);
  for (std::size_t i = 0; i < q; ++i) rows.push_back(open[i].second);
  return rows;
}

Eigen::MatrixXd candidate_distances(const Eigen::MatrixXd& observed, const EmbeddingStore& store,
                                    std::span<const std::size_t> candidates) {
  if (observed.cols() != store.dim()) throw std::invalid_argument("embedding dimension mismatch");
  Eigen::MatrixXd d(observed.rows(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    Eigen::VectorXd e = store.row_vector(candidates[c]);
    for (Eigen::Index i = 0; i < observed.rows(); ++i) {
      d(i, static_cast<Eigen::Index>(c)) = (observed.row(i).transpose() - e).norm();
    }
  }
  return d;
}

AcquisitionResult select_next(const FittedGP& gp, const EmbeddingStore& store,
                              std::span<const std::size_t> candidates,
                              std::span<const std::size_t> screened, double f_best) {
  Eigen::VectorXd mean, variance;
  gp.posterior_from_distances(candidate_distances(gp.inputs(), store, candidates), mean, variance);
  return select_from_posteriors(candidates, mean, variance, mask_from(screened, candidates), f_best);
}

std::vector<std::size_t> select_batch(const FittedGP& gp, const EmbeddingStore& store,
                                      std::span<const std::size_t> candidates,
                                      std::span<const std::size_t> screened, double f_best,
                                      std::size_t q) {
  Eigen::VectorXd mean, variance;
  gp.posterior_from_distances(candidate_distances(gp.inputs(), store, candidates), mean, variance);
  return top_q_from_posteriors(candidates, mean, variance, mask_from(screened, candidates), f_best, q);
}

}  // namespace evoboss
