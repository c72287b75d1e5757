// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "evoboss/embeddings.hpp"
#include "evoboss/gp.hpp"

namespace evoboss {

double normal_pdf(double z);
double normal_cdf(double z);

// E[max(f - f_best, 0)] for f ~ N(mu, var).
double expected_improvement(double mu, double var, double f_best);

struct AcquisitionResult {
  std::vector<double> values;  // aligned with the candidate list; 0 for screened entries
  std::size_t chosen = 0;      // store row of the selected candidate
};

// Masked argmax over precomputed posteriors (aligned with candidates). Ties go
// to the lowest store row; when every value is zero the lowest unscreened row
// is chosen. `screened` is indexed by store row. Throws SearchSpaceExhausted.
AcquisitionResult select_from_posteriors(std::span<const std::size_t> candidates,
                                         const Eigen::VectorXd& mean, const Eigen::VectorXd& variance,
                                         const std::vector<bool>& screened, double f_best);

// Rows of the q largest masked EI values, descending, ties by lowest row.
std::vector<std::size_t> top_q_from_posteriors(std::span<const std::size_t> candidates,
                                               const Eigen::VectorXd& mean,
                                               const Eigen::VectorXd& variance,
                                               const std::vector<bool>& screened, double f_best,
                                               std::size_t q);

AcquisitionResult select_next(const FittedGP& gp, const EmbeddingStore& store,
                              std::span<const std::size_t> candidates,
                              std::span<const std::size_t> screened, double f_best);

std::vector<std::size_t> select_batch(const FittedGP& gp, const EmbeddingStore& store,
                                      std::span<const std::size_t> candidates,
                                      std::span<const std::size_t> screened, double f_best,
                                      std::size_t q);

// Raw Euclidean distances between observations (rows of observed) and the
// candidate rows, as a t x C matrix.
Eigen::MatrixXd candidate_distances(const Eigen::MatrixXd& observed, const EmbeddingStore& store,
                                    std::span<const std::size_t> candidates);

}  // namespace evoboss
