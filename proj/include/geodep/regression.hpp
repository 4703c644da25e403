#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>

#include "geodep/sample_model.hpp"

namespace geodep {

/// Basis expansion phi(x). Polynomial bases use per-dimension powers 1..degree
/// with one shared intercept and no cross terms, so m = 1 + d * degree.
struct BasisSpec {
  enum class Kind { Polynomial, IdentityWithIntercept };
  Kind kind = Kind::Polynomial;
  int degree = 1;

  static BasisSpec polynomial(int degree) { return {Kind::Polynomial, degree}; }
  static BasisSpec identity_with_intercept() { return {Kind::IdentityWithIntercept, 1}; }

  Index output_dim(Index input_dim) const;
};

MatrixXd apply_basis(const Eigen::Ref<const MatrixXd>& x, const BasisSpec& spec);

/// Gaussian prior w ~ N(0, sigma_p) and observation noise variance.
struct WeightPrior {
  MatrixXd sigma_p;
  double noise_var = 1.0;

  /// Symmetric to 1e-12, positive definite, noise_var > 0.
  void validate() const;
};

/// RBF hyperparameters: sigma_f^2 exp(-d^2 / (2 l^2)) + sigma^2 delta.
struct KernelParams {
  double signal_var = 1.0;
  double length_scale = 1.0;
  double noise_var = 0.0;

  void validate() const;
};

struct PredictiveDistribution {
  VectorXd mean;
  MatrixXd cov;

  VectorXd sd() const { return cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

/// Weight-space predictive distribution: the Gaussian posterior over weights
/// pushed through phi at the test inputs. Solved through the n x n system
/// Phi^T Sigma_p Phi + sigma^2 I.
PredictiveDistribution weight_space_predict(const Eigen::Ref<const MatrixXd>& train_x,
                                            const Eigen::Ref<const VectorXd>& train_z,
                                            const Eigen::Ref<const MatrixXd>& test_x, const BasisSpec& spec,
                                            const WeightPrior& prior);

/// delta is a Kronecker delta on observation identity, not on coordinate equality.
double rbf_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  const KernelParams& params, bool same_index);

/// Noise-free RBF cross-covariance between the rows of `a` and `b`.
MatrixXd rbf_gram(const Eigen::Ref<const MatrixXd>& a, const Eigen::Ref<const MatrixXd>& b,
                  const KernelParams& params);

enum class MeanFunction { Zero, Constant };

/// Covariance function over rows: k(a, b) without any noise term.
using CovarianceFunction =
    std::function<double(const Eigen::Ref<const Eigen::RowVectorXd>&, const Eigen::Ref<const Eigen::RowVectorXd>&)>;

/// GP posterior with an arbitrary covariance function; noise_var is added on
/// the training diagonal only. Conditions on z minus the mean function.
PredictiveDistribution gp_predict(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                  const Eigen::Ref<const MatrixXd>& test_x, const CovarianceFunction& kernel,
                                  double noise_var, MeanFunction mean_fn = MeanFunction::Zero);

/// GP posterior with the RBF kernel.
PredictiveDistribution gp_predict(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                  const Eigen::Ref<const MatrixXd>& test_x, const KernelParams& params,
                                  MeanFunction mean_fn = MeanFunction::Zero);

struct EquivalenceReport {
  double mean_discrepancy = 0.0;
  double cov_discrepancy = 0.0;
  double max_discrepancy() const { return std::max(mean_discrepancy, cov_discrepancy); }
};

/// Compares the weight-space prediction with the GP prediction under the
/// induced kernel k(x, x') = phi(x)^T Sigma_p phi(x'), evaluated pointwise.
EquivalenceReport equivalence_check(const Eigen::Ref<const MatrixXd>& train_x,
                                    const Eigen::Ref<const VectorXd>& train_z,
                                    const Eigen::Ref<const MatrixXd>& test_x, const BasisSpec& spec,
                                    const WeightPrior& prior);

struct EquivalenceSweep {
  int trials = 0;
  double max_mean_discrepancy = 0.0;
  double max_cov_discrepancy = 0.0;
  double max_discrepancy() const { return std::max(max_mean_discrepancy, max_cov_discrepancy); }
};

/// equivalence_check over seeded random 1-D instances: n ~ U{1..n_max} training
/// points in [-1, 1], polynomial basis with m ~ U{1..m_max} functions, Sigma_p
/// with eigenvalues in [0.5, 2], noise variance in [0.05, 0.5], 5 test points.
EquivalenceSweep equivalence_sweep(int trials, int n_max, int m_max, std::uint64_t seed);

/// Log marginal likelihood and its gradient with respect to
/// (log sigma_f^2, log l, log sigma^2).
struct MarginalLikelihood {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

MarginalLikelihood log_marginal_likelihood(const Eigen::Ref<const MatrixXd>& train_x,
                                           const Eigen::Ref<const VectorXd>& train_z, const KernelParams& params);

struct HyperparamOptions {
  bool fit_noise = true;
  MeanFunction mean_fn = MeanFunction::Zero;
  int max_iters = 200;
  /// Variance floors, relative to the variance of the (centred) targets.
  double signal_floor = 1e-6;
  double noise_floor = 1e-8;
};

struct HyperparamFit {
  KernelParams params;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Maximises the log marginal likelihood in log-parameter space (BFGS).
/// Never returns parameters worse than `init`.
HyperparamFit optimize_hyperparams(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                   const KernelParams& init, const HyperparamOptions& options = {});

struct MixedPrediction {
  PredictiveDistribution combined;
  VectorXd linear;  // phi(x1*)^T w at the test points
  PredictiveDistribution residual;  // GP over x2 on the OLS residuals
  VectorXd weights;  // zero for basis columns that are constant on the training set
  KernelParams params;  // GP hyperparameters used
};

/// Two-stage fit of f(x1, x2) = phi(x1)^T w + g(x2): OLS on phi(x1), then a
/// zero-mean RBF GP on the residuals over x2.
MixedPrediction mixed_fit_predict(const Eigen::Ref<const MatrixXd>& x1, const Eigen::Ref<const MatrixXd>& x2,
                                  const Eigen::Ref<const VectorXd>& z, const Eigen::Ref<const MatrixXd>& test_x1,
                                  const Eigen::Ref<const MatrixXd>& test_x2, const BasisSpec& spec,
                                  const KernelParams& params, bool optimize = true);

}  // namespace geodep
