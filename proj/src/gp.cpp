// SPDX-License-Identifier: Apache-2.0
#include "evoboss/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "evoboss/errors.hpp"
#include "evoboss/optimize.hpp"

namespace evoboss {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_dims(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw std::invalid_argument("embedding dimension mismatch");
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& X) {
  const Eigen::Index t = X.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      double v = (X.row(i) - X.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

// Lower Cholesky factor of the jittered kernel matrix built from raw distances,
// or nullopt when the factorization breaks down.
std::optional<Eigen::MatrixXd> factor(const Eigen::MatrixXd& raw_distances, KernelFamily family,
                                      double theta, double jitter) {
  const Eigen::Index t = raw_distances.rows();
  Eigen::MatrixXd K(t, t);
  for (Eigen::Index j = 0; j < t; ++j) {
    for (Eigen::Index i = j; i < t; ++i) {
      K(i, j) = kernel_at(family, theta * raw_distances(i, j));
    }
    K(j, j) += jitter;
  }
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(K);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd L = llt.matrixL();
  for (Eigen::Index i = 0; i < t; ++i) {
    if (!(L(i, i) > 0.0) || !std::isfinite(L(i, i))) return std::nullopt;
  }
  return L;
}

double lml_from_factor(const Eigen::MatrixXd& L, const Eigen::VectorXd& y) {
  Eigen::VectorXd w = L.triangularView<Eigen::Lower>().solve(y);
  double log_det = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Matern32Scaled ? "matern32" : "se";
}

std::string to_string(FitObjective objective) { return objective == FitObjective::Map ? "map" : "mle"; }

KernelFamily parse_kernel_family(const std::string& text) {
  if (text == "matern32") return KernelFamily::Matern32Scaled;
  if (text == "se") return KernelFamily::SquaredExponential;
  throw std::invalid_argument("unknown kernel family: " + text);
}

FitObjective parse_fit_objective(const std::string& text) {
  if (text == "map") return FitObjective::Map;
  if (text == "mle") return FitObjective::Mle;
  throw std::invalid_argument("unknown fit objective: " + text);
}

double distance(std::span<const double> a, std::span<const double> b, double theta) {
  check_dims(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return theta * std::sqrt(sq);
}

double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double theta) {
  check_dims(a.size(), b.size());
  return theta * (a - b).norm();
}

double kernel_at(KernelFamily family, double d) {
  if (family == KernelFamily::Matern32Scaled) {
    double r = kSqrt3 * d;
    return std::exp(-r) * (1.0 + r);
  }
  return std::exp(-0.5 * d * d);
}

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelSpec& spec) {
  return kernel_at(spec.family, distance(a, b, spec.theta));
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec) {
  Eigen::MatrixXd d = pairwise_distances(X);
  Eigen::MatrixXd K(X.rows(), X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = kernel_at(spec.family, spec.theta * d(i, j));
  }
  return K;
}

// ---------------------------------------------------------------------------

LengthScalePrior LengthScalePrior::for_dimension(int m) {
  if (m < 1) throw std::invalid_argument("prior: dimension must be positive");
  return LengthScalePrior{std::sqrt(static_cast<double>(m)) / 3.0};
}

double LengthScalePrior::density(double theta) const {
  if (theta < 0.0) return 0.0;
  double z = theta / sigma;
  return 2.0 / (sigma * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * z * z);
}

double LengthScalePrior::log_density(double theta) const {
  if (theta < 0.0) return kNegInf;
  double z = theta / sigma;
  return std::log(2.0) - std::log(sigma) - 0.5 * kLog2Pi - 0.5 * z * z;
}

double LengthScalePrior::quantile(double p) const {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("prior quantile: p must be in [0, 1)");
  return sigma * std::numbers::sqrt2 * boost::math::erf_inv(p);
}

double default_jitter(const KernelSpec& spec) {
  return 1e-8 * (1.0 + kernel_at(spec.family, 0.0));
}

double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const KernelSpec& spec, double jitter) {
  if (X.rows() < 1 || X.rows() != y.size()) throw std::invalid_argument("lml: need t >= 1 matching rows");
  auto L = factor(pairwise_distances(X), spec.family, spec.theta, jitter);
  if (!L) throw NumericalError("Cholesky factorization failed; jitter too small");
  return lml_from_factor(*L, y);
}

// ---------------------------------------------------------------------------

FittedGP::FittedGP(Eigen::MatrixXd X, Eigen::VectorXd y, KernelSpec spec, double jitter)
    : X_(std::move(X)), y_(std::move(y)), spec_(spec), jitter_(jitter) {
  if (X_.rows() < 1 || X_.rows() != y_.size()) throw std::invalid_argument("FittedGP: need t >= 1 matching rows");
  if (spec_.theta < 0.0) throw std::invalid_argument("FittedGP: theta must be non-negative");
  auto L = factor(pairwise_distances(X_), spec_.family, spec_.theta, jitter_);
  if (!L) throw NumericalError("Cholesky factorization failed; jitter too small");
  chol_ = std::move(*L);
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(
      chol_.triangularView<Eigen::Lower>().solve(y_));
  lml_ = lml_from_factor(chol_, y_);
  objective_ = lml_;
}

Posterior FittedGP::posterior(const Eigen::VectorXd& e) const {
  check_dims(e.size(), X_.cols());
  Eigen::MatrixXd raw(X_.rows(), 1);
  for (Eigen::Index i = 0; i < X_.rows(); ++i) raw(i, 0) = (X_.row(i).transpose() - e).norm();
  Eigen::VectorXd mean, variance;
  posterior_from_distances(raw, mean, variance);
  return {mean[0], variance[0]};
}

void FittedGP::posterior_from_distances(const Eigen::Ref<const Eigen::MatrixXd>& raw_distances,
                                        Eigen::VectorXd& mean,
                                        Eigen::VectorXd& variance) const {
  if (raw_distances.rows() != X_.rows()) throw std::invalid_argument("posterior: distance rows != t");
  Eigen::MatrixXd cross(raw_distances.rows(), raw_distances.cols());
  for (Eigen::Index c = 0; c < raw_distances.cols(); ++c) {
    for (Eigen::Index i = 0; i < raw_distances.rows(); ++i) {
      cross(i, c) = kernel_at(spec_.family, spec_.theta * raw_distances(i, c));
    }
  }
  mean = cross.transpose() * alpha_;
  chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
  const double prior_var = kernel_at(spec_.family, 0.0);
  variance = (prior_var - cross.colwise().squaredNorm().array()).max(0.0).matrix().transpose();
}

Posterior posterior(const FittedGP& gp, const Eigen::VectorXd& e) { return gp.posterior(e); }

// ---------------------------------------------------------------------------

ThetaObjective::ThetaObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
                               FitObjective objective, LengthScalePrior prior, double jitter)
    : dist_(pairwise_distances(X)), y_(y), family_(family), objective_(objective), prior_(prior),
      jitter_(jitter) {
  if (X.rows() < 1 || X.rows() != y.size()) throw std::invalid_argument("fit: need t >= 1 matching rows");
}

double ThetaObjective::log_likelihood(double theta) const {
  if (theta < 0.0) return kNegInf;
  auto L = factor(dist_, family_, theta, jitter_);
  if (!L) return kNegInf;
  return lml_from_factor(*L, y_);
}

double ThetaObjective::operator()(double theta) const {
  double value = log_likelihood(theta);
  if (objective_ == FitObjective::Map && std::isfinite(value)) value += prior_.log_density(theta);
  return value;
}

FittedGP fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LengthScalePrior& prior,
             const FitOptions& options) {
  if (options.starts < 1) throw std::invalid_argument("fit: starts must be positive");
  std::vector<double> starts;
  for (int i = 1; i <= options.starts; ++i) {
    starts.push_back(prior.quantile(static_cast<double>(i) / (options.starts + 1)));
  }
  if (options.extra_start && std::isfinite(*options.extra_start)) {
    starts.push_back(std::max(0.0, *options.extra_start));
  }

  Maximize1DOptions search;
  search.lower = 0.0;
  search.upper = options.upper_sigmas * prior.sigma;
  search.rho_begin = std::max(0.1 * prior.sigma, options.rho_end);
  search.rho_end = options.rho_end;

  double jitter = options.jitter.value_or(default_jitter(KernelSpec{options.family, 0.0}));
  while (true) {
    ThetaObjective objective(X, y, options.family, options.objective, prior, jitter);
    Maximum1D best{0.0, kNegInf, 0};
    bool have = false;
    for (double s : starts) {
      Maximum1D local = maximize_1d(objective, s, search);
      if (!std::isfinite(local.value)) continue;
      if (!have || local.value > best.value || (local.value == best.value && local.x < best.x)) {
        best = local;
        have = true;
      }
    }
    if (have) {
      try {
        FittedGP gp(X, y, KernelSpec{options.family, best.x}, jitter);
        gp.set_objective(best.value);
        return gp;
      } catch (const NumericalError&) {
      }
    }
    if (jitter * 10.0 > options.max_jitter * (1.0 + 1e-12)) {
      throw NumericalError("GP fit failed: Cholesky breaks down at every start up to jitter " +
                           std::to_string(jitter));
    }
    jitter *= 10.0;
  }
}

}  // namespace evoboss
