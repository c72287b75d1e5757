// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace evoboss {

enum class KernelFamily { Matern32Scaled, SquaredExponential };
enum class FitObjective { Map, Mle };

std::string to_string(KernelFamily family);
std::string to_string(FitObjective objective);
KernelFamily parse_kernel_family(const std::string& text);  // "matern32" | "se"
FitObjective parse_fit_objective(const std::string& text);  // "map" | "mle"

struct KernelSpec {
  KernelFamily family = KernelFamily::Matern32Scaled;
  double theta = 1.0;  // multiplies Euclidean distance, so larger theta means shorter correlation
};

// theta * ||a - b||.
double distance(std::span<const double> a, std::span<const double> b, double theta);
double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double theta);

// Covariance as a function of the already scaled distance d.
double kernel_at(KernelFamily family, double d);
double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelSpec& spec);

// Kernel matrix K(X, X) for the rows of X (no jitter).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelSpec& spec);

// Normal(0, sigma) truncated to [0, inf) and renormalised.
struct LengthScalePrior {
  double sigma = 1.0;

  // sigma = sqrt(m) / 3: the diagonal of an m-dimensional box of side ~1 is
  // about sqrt(m), and that diagonal is placed at three sigma.
  static LengthScalePrior for_dimension(int m);

  double density(double theta) const;
  double log_density(double theta) const;
  double quantile(double p) const;
};

// Default jitter: 1e-8 * (1 + largest kernel diagonal entry).
double default_jitter(const KernelSpec& spec);

// -1/2 y^T (K + jI)^-1 y - 1/2 log det(K + jI) - t/2 log(2 pi), via Cholesky.
// Throws NumericalError when K + jI is not numerically positive definite.
double log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const KernelSpec& spec, double jitter);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Zero-mean, noiseless (jittered) GP conditioned on observations at a fixed
// kernel. Immutable and safe to query concurrently.
class FittedGP {
 public:
  // Throws NumericalError if the Cholesky factorization fails.
  FittedGP(Eigen::MatrixXd X, Eigen::VectorXd y, KernelSpec spec, double jitter);

  const Eigen::MatrixXd& inputs() const { return X_; }
  const Eigen::VectorXd& targets() const { return y_; }
  const KernelSpec& spec() const { return spec_; }
  double theta() const { return spec_.theta; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double log_marginal_likelihood() const { return lml_; }
  // Value of the fitting objective at theta (likelihood, plus log prior under MAP).
  double objective() const { return objective_; }
  void set_objective(double value) { objective_ = value; }

  Posterior posterior(const Eigen::VectorXd& e) const;

  // Batch posterior from unscaled Euclidean distances: column c of
  // raw_distances holds ||e_c - x_i|| for every observation i (t x C).
  void posterior_from_distances(const Eigen::Ref<const Eigen::MatrixXd>& raw_distances, Eigen::VectorXd& mean,
                                Eigen::VectorXd& variance) const;

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  KernelSpec spec_;
  double jitter_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
  double objective_ = 0.0;
};

Posterior posterior(const FittedGP& gp, const Eigen::VectorXd& e);

struct FitOptions {
  KernelFamily family = KernelFamily::Matern32Scaled;
  FitObjective objective = FitObjective::Map;
  int starts = 20;
  double rho_end = 1e-4;
  // Additional start point (e.g. previous iteration's optimum).
  std::optional<double> extra_start;
  // Overrides default_jitter when set.
  std::optional<double> jitter;
  double max_jitter = 1e-2;
  // Upper end of the theta search interval, in units of prior sigma.
  double upper_sigmas = 100.0;
};

// Objective over theta for a fixed data set, with the pairwise distances
// computed once.
class ThetaObjective {
 public:
  ThetaObjective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
                 FitObjective objective, LengthScalePrior prior, double jitter);

  // Returns -inf when the Cholesky factorization fails at this theta.
  double operator()(double theta) const;
  double log_likelihood(double theta) const;

 private:
  Eigen::MatrixXd dist_;
  Eigen::VectorXd y_;
  KernelFamily family_;
  FitObjective objective_;
  LengthScalePrior prior_;
  double jitter_;
};

// Multi-start derivative-free maximization of the theta objective from the
// prior quantiles {1..starts}/(starts+1), plus extra_start when given. Jitter
// escalates tenfold up to max_jitter when every start fails.
FittedGP fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LengthScalePrior& prior,
             const FitOptions& options = {});

}  // namespace evoboss
