#include "geodep/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "geodep/errors.hpp"
#include "geodep/linalg.hpp"
#include "geodep/optimize.hpp"

namespace geodep {

Index BasisSpec::output_dim(Index input_dim) const {
  if (kind == Kind::IdentityWithIntercept) return 1 + input_dim;
  return 1 + input_dim * degree;
}

MatrixXd apply_basis(const Eigen::Ref<const MatrixXd>& x, const BasisSpec& spec) {
  if (spec.kind == BasisSpec::Kind::Polynomial && spec.degree < 0)
    throw ValidationError("polynomial degree must be non-negative");
  const int degree = spec.kind == BasisSpec::Kind::IdentityWithIntercept ? 1 : spec.degree;
  const Index d = x.cols();
  MatrixXd out(x.rows(), 1 + d * degree);
  out.col(0).setOnes();
  for (Index c = 0; c < d; ++c) {
    VectorXd power = VectorXd::Ones(x.rows());
    for (int k = 1; k <= degree; ++k) {
      power = power.cwiseProduct(x.col(c));
      out.col(1 + c * degree + (k - 1)) = power;
    }
  }
  return out;
}

void WeightPrior::validate() const {
  if (sigma_p.rows() != sigma_p.cols() || sigma_p.rows() == 0)
    throw ValidationError("prior covariance must be a non-empty square matrix");
  if (!sigma_p.allFinite()) throw ValidationError("prior covariance has non-finite entries");
  if ((sigma_p - sigma_p.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, sigma_p.cwiseAbs().maxCoeff()))
    throw ValidationError("prior covariance is not symmetric");
  if (!(min_eigenvalue(sigma_p) > 0.0)) throw ValidationError("prior covariance is not positive definite");
  if (!(noise_var > 0.0) || !std::isfinite(noise_var)) throw ValidationError("noise variance must be positive");
}

void KernelParams::validate() const {
  if (!(signal_var > 0.0) || !(length_scale > 0.0) || !(noise_var >= 0.0) || !std::isfinite(signal_var) ||
      !std::isfinite(length_scale) || !std::isfinite(noise_var))
    throw ValidationError("kernel parameters require signal_var > 0, length_scale > 0, noise_var >= 0");
}

namespace {

double covariance_tolerance(const MatrixXd& prior_cov) {
  const double scale = prior_cov.size() ? prior_cov.diagonal().cwiseAbs().maxCoeff() : 0.0;
  return 1e-10 * std::max(1.0, scale);
}

// Shared conditioning step: K_train already includes the noise diagonal.
PredictiveDistribution condition(const MatrixXd& k_train, const MatrixXd& k_cross, MatrixXd k_test,
                                 const VectorXd& centred_z, double mean_offset) {
  const SpdFactor factor = factorize_spd(k_train);
  PredictiveDistribution out;
  out.mean = k_cross.transpose() * factor.solve(centred_z);
  out.mean.array() += mean_offset;
  const MatrixXd v = factor.whiten(k_cross);
  const double tol = covariance_tolerance(k_test);
  out.cov = std::move(k_test);
  out.cov.noalias() -= v.transpose() * v;
  clean_covariance(out.cov, tol);
  return out;
}

}  // namespace

PredictiveDistribution weight_space_predict(const Eigen::Ref<const MatrixXd>& train_x,
                                            const Eigen::Ref<const VectorXd>& train_z,
                                            const Eigen::Ref<const MatrixXd>& test_x, const BasisSpec& spec,
                                            const WeightPrior& prior) {
  if (train_x.rows() < 1) throw ValidationError("weight-space prediction needs at least one training point");
  if (train_x.rows() != train_z.size()) throw ValidationError("training inputs and targets differ in length");
  if (test_x.cols() != train_x.cols()) throw ValidationError("test inputs have the wrong dimension");
  prior.validate();
  const MatrixXd phi = apply_basis(train_x, spec);
  const MatrixXd phi_test = apply_basis(test_x, spec);
  if (phi.cols() != prior.sigma_p.rows()) throw ValidationError("prior covariance does not match the basis dimension");

  const MatrixXd sp_phi = prior.sigma_p * phi.transpose();         // m x n
  const MatrixXd sp_phi_test = prior.sigma_p * phi_test.transpose();  // m x n*
  MatrixXd k_train = phi * sp_phi;
  k_train.diagonal().array() += prior.noise_var;
  return condition(k_train, phi * sp_phi_test, phi_test * sp_phi_test, train_z, 0.0);
}

double rbf_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  const KernelParams& params, bool same_index) {
  if (a.size() != b.size()) throw ValidationError("rbf_kernel: points have different dimensions");
  const double d2 = (a - b).squaredNorm();
  const double value = params.signal_var * std::exp(-d2 / (2.0 * params.length_scale * params.length_scale));
  return same_index ? value + params.noise_var : value;
}

MatrixXd rbf_gram(const Eigen::Ref<const MatrixXd>& a, const Eigen::Ref<const MatrixXd>& b,
                  const KernelParams& params) {
  if (a.cols() != b.cols()) throw ValidationError("rbf_gram: point sets have different dimensions");
  const double inv = 1.0 / (2.0 * params.length_scale * params.length_scale);
  MatrixXd k(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) k(i, j) = params.signal_var * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return k;
}

namespace {

MatrixXd evaluate(const CovarianceFunction& kernel, const Eigen::Ref<const MatrixXd>& a,
                  const Eigen::Ref<const MatrixXd>& b) {
  MatrixXd k(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) k(i, j) = kernel(a.row(i), b.row(j));
  return k;
}

PredictiveDistribution gp_from_matrices(const Eigen::Ref<const VectorXd>& train_z, MatrixXd k_train,
                                        const MatrixXd& k_cross, MatrixXd k_test, double noise_var,
                                        MeanFunction mean_fn) {
  const Index n = train_z.size();
  if (n == 0) {
    PredictiveDistribution prior;
    prior.mean = VectorXd::Zero(k_test.rows());
    prior.cov = std::move(k_test);
    clean_covariance(prior.cov, covariance_tolerance(prior.cov));
    return prior;
  }
  const double offset = mean_fn == MeanFunction::Constant ? train_z.mean() : 0.0;
  k_train.diagonal().array() += noise_var;
  return condition(k_train, k_cross, std::move(k_test), train_z.array() - offset, offset);
}

void check_shapes(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                  const Eigen::Ref<const MatrixXd>& test_x) {
  if (train_x.rows() != train_z.size()) throw ValidationError("training inputs and targets differ in length");
  if (train_x.rows() > 0 && test_x.cols() != train_x.cols())
    throw ValidationError("test inputs have the wrong dimension");
  require_finite(train_x, "training inputs");
  require_finite(train_z, "training targets");
  require_finite(test_x, "test inputs");
}

}  // namespace

PredictiveDistribution gp_predict(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                  const Eigen::Ref<const MatrixXd>& test_x, const CovarianceFunction& kernel,
                                  double noise_var, MeanFunction mean_fn) {
  check_shapes(train_x, train_z, test_x);
  if (!(noise_var >= 0.0)) throw ValidationError("noise variance must be non-negative");
  return gp_from_matrices(train_z, evaluate(kernel, train_x, train_x), evaluate(kernel, train_x, test_x),
                          evaluate(kernel, test_x, test_x), noise_var, mean_fn);
}

PredictiveDistribution gp_predict(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                  const Eigen::Ref<const MatrixXd>& test_x, const KernelParams& params,
                                  MeanFunction mean_fn) {
  params.validate();
  check_shapes(train_x, train_z, test_x);
  return gp_from_matrices(train_z, rbf_gram(train_x, train_x, params), rbf_gram(train_x, test_x, params),
                          rbf_gram(test_x, test_x, params), params.noise_var, mean_fn);
}

EquivalenceReport equivalence_check(const Eigen::Ref<const MatrixXd>& train_x,
                                    const Eigen::Ref<const VectorXd>& train_z,
                                    const Eigen::Ref<const MatrixXd>& test_x, const BasisSpec& spec,
                                    const WeightPrior& prior) {
  const PredictiveDistribution weight_view = weight_space_predict(train_x, train_z, test_x, spec, prior);

  const MatrixXd& sigma_p = prior.sigma_p;
  const CovarianceFunction feature_kernel = [&](const Eigen::Ref<const Eigen::RowVectorXd>& a,
                                                const Eigen::Ref<const Eigen::RowVectorXd>& b) {
    const MatrixXd pa = apply_basis(a, spec);
    const MatrixXd pb = apply_basis(b, spec);
    return (pa * sigma_p * pb.transpose())(0, 0);
  };
  const PredictiveDistribution function_view =
      gp_predict(train_x, train_z, test_x, feature_kernel, prior.noise_var, MeanFunction::Zero);

  EquivalenceReport report;
  if (test_x.rows() > 0) {
    report.mean_discrepancy = (weight_view.mean - function_view.mean).cwiseAbs().maxCoeff();
    report.cov_discrepancy = (weight_view.cov - function_view.cov).cwiseAbs().maxCoeff();
  }
  return report;
}

EquivalenceSweep equivalence_sweep(int trials, int n_max, int m_max, std::uint64_t seed) {
  if (trials < 1 || n_max < 1 || m_max < 1) throw ValidationError("trials, n and m must all be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_n(1, n_max);
  std::uniform_int_distribution<int> pick_m(1, m_max);
  std::uniform_real_distribution<double> pick_eig(0.5, 2.0);
  std::uniform_real_distribution<double> pick_noise(0.05, 0.5);
  constexpr Index kTest = 5;

  EquivalenceSweep sweep;
  sweep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const Index n = pick_n(rng);
    const Index m = pick_m(rng);
    MatrixXd x(n, 1), xs(kTest, 1);
    VectorXd z(n);
    for (Index i = 0; i < n; ++i) x(i, 0) = unit(rng);
    for (Index i = 0; i < kTest; ++i) xs(i, 0) = unit(rng);
    for (Index i = 0; i < n; ++i) z(i) = normal(rng);

    MatrixXd g(m, m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) g(i, j) = normal(rng);
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
    VectorXd eig(m);
    for (Index i = 0; i < m; ++i) eig(i) = pick_eig(rng);
    WeightPrior prior;
    prior.sigma_p = q * eig.asDiagonal() * q.transpose();
    prior.sigma_p = 0.5 * (prior.sigma_p + prior.sigma_p.transpose()).eval();
    prior.noise_var = pick_noise(rng);

    const EquivalenceReport r =
        equivalence_check(x, z, xs, BasisSpec::polynomial(static_cast<int>(m - 1)), prior);
    sweep.max_mean_discrepancy = std::max(sweep.max_mean_discrepancy, r.mean_discrepancy);
    sweep.max_cov_discrepancy = std::max(sweep.max_cov_discrepancy, r.cov_discrepancy);
  }
  return sweep;
}

MarginalLikelihood log_marginal_likelihood(const Eigen::Ref<const MatrixXd>& train_x,
                                           const Eigen::Ref<const VectorXd>& train_z, const KernelParams& params) {
  params.validate();
  check_shapes(train_x, train_z, train_x);
  const Index n = train_z.size();
  if (n < 1) throw ValidationError("marginal likelihood needs at least one observation");

  const MatrixXd k_signal = rbf_gram(train_x, train_x, params);
  MatrixXd k = k_signal;
  k.diagonal().array() += params.noise_var;
  const SpdFactor factor = factorize_spd(k);
  const VectorXd alpha = factor.solve(train_z);

  MarginalLikelihood out;
  out.value = -0.5 * train_z.dot(alpha) - 0.5 * factor.log_det() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // d/dtheta = 0.5 tr((alpha alpha^T - K^{-1}) dK/dtheta)
  const MatrixXd inner = alpha * alpha.transpose() - factor.solve(MatrixXd::Identity(n, n));
  const MatrixXd d2 = pairwise_distances(train_x).entries().array().square();
  const double l2 = params.length_scale * params.length_scale;
  out.gradient(0) = 0.5 * (inner.array() * k_signal.array()).sum();
  out.gradient(1) = 0.5 * (inner.array() * k_signal.array() * d2.array()).sum() / l2;
  out.gradient(2) = 0.5 * params.noise_var * inner.trace();
  return out;
}

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

HyperparamFit optimize_hyperparams(const Eigen::Ref<const MatrixXd>& train_x, const Eigen::Ref<const VectorXd>& train_z,
                                   const KernelParams& init, const HyperparamOptions& options) {
  init.validate();
  check_shapes(train_x, train_z, train_x);
  const Index n = train_z.size();
  if (n < 2) throw ValidationError("hyperparameter optimisation needs at least two observations");

  const double offset = options.mean_fn == MeanFunction::Constant ? train_z.mean() : 0.0;
  const VectorXd z = train_z.array() - offset;
  double reference = (z.array() - z.mean()).square().mean();
  if (!(reference > 0.0)) reference = z.squaredNorm() / static_cast<double>(n);
  if (!(reference > 0.0)) reference = 1.0;
  const double signal_floor = options.signal_floor * reference;
  const double noise_floor = options.noise_floor * reference;

  double span = pairwise_distances(train_x).max();
  if (!(span > 0.0)) span = 1.0;
  const double log_l_lo = std::log(1e-3 * span);
  const double log_l_hi = std::log(1e3 * span);

  auto decode = [&](const Eigen::VectorXd& u) {
    KernelParams p;
    p.signal_var = signal_floor + std::exp(u(0));
    p.length_scale = std::exp(log_l_lo + (log_l_hi - log_l_lo) * sigmoid(u(1)));
    p.noise_var = options.fit_noise ? noise_floor + std::exp(u(2)) : init.noise_var;
    return p;
  };

  const ObjectiveWithGradient objective = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad) {
    const KernelParams p = decode(u);
    MarginalLikelihood ml;
    try {
      ml = log_marginal_likelihood(train_x, z, p);
    } catch (const ConditioningError&) {
      if (grad) grad->setZero(u.size());
      return std::numeric_limits<double>::infinity();
    }
    if (grad) {
      grad->resize(u.size());
      const double s = sigmoid(u(1));
      (*grad)(0) = -ml.gradient(0) * std::exp(u(0)) / p.signal_var;
      (*grad)(1) = -ml.gradient(1) * (log_l_hi - log_l_lo) * s * (1.0 - s);
      if (options.fit_noise) (*grad)(2) = -ml.gradient(2) * std::exp(u(2)) / p.noise_var;
    }
    return -ml.value;
  };

  Eigen::VectorXd u0(options.fit_noise ? 3 : 2);
  u0(0) = std::log(std::max(init.signal_var - signal_floor, 1e-3 * signal_floor));
  const double log_l = std::clamp(std::log(init.length_scale), log_l_lo + 1e-9, log_l_hi - 1e-9);
  const double t = (log_l - log_l_lo) / (log_l_hi - log_l_lo);
  u0(1) = std::log(t / (1.0 - t));
  if (options.fit_noise) u0(2) = std::log(std::max(init.noise_var - noise_floor, 1e-3 * noise_floor));

  HyperparamFit fit;
  fit.params = init;
  try {
    fit.initial_log_likelihood = log_marginal_likelihood(train_x, z, init).value;
  } catch (const ConditioningError&) {
    fit.initial_log_likelihood = -std::numeric_limits<double>::infinity();
  }
  fit.log_likelihood = fit.initial_log_likelihood;

  GradientOptions gopts;
  gopts.max_iters = options.max_iters;
  gopts.grad_tol = 1e-7;
  const OptimizeResult r = minimize_bfgs(objective, u0, gopts);
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  if (std::isfinite(r.value) && -r.value >= fit.initial_log_likelihood) {
    fit.params = decode(r.x);
    fit.log_likelihood = -r.value;
  }
  return fit;
}

MixedPrediction mixed_fit_predict(const Eigen::Ref<const MatrixXd>& x1, const Eigen::Ref<const MatrixXd>& x2,
                                  const Eigen::Ref<const VectorXd>& z, const Eigen::Ref<const MatrixXd>& test_x1,
                                  const Eigen::Ref<const MatrixXd>& test_x2, const BasisSpec& spec,
                                  const KernelParams& params, bool optimize) {
  const Index n = z.size();
  if (x1.rows() != n || x2.rows() != n) throw ValidationError("x1, x2 and z must share the same row count");
  if (test_x1.rows() != test_x2.rows()) throw ValidationError("test_x1 and test_x2 must share the same row count");
  if (n < 1) throw ValidationError("mixed model needs at least one observation");
  params.validate();

  const MatrixXd phi = apply_basis(x1, spec);
  const MatrixXd phi_test = apply_basis(test_x1, spec);

  // Columns other than the intercept that are constant on the training set
  // are indistinguishable from it; their weights are pinned to zero.
  std::vector<Index> active{0};
  for (Index c = 1; c < phi.cols(); ++c)
    if (phi.col(c).maxCoeff() != phi.col(c).minCoeff()) active.push_back(c);

  MatrixXd design(n, static_cast<Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) design.col(static_cast<Index>(k)) = phi.col(active[k]);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols())
    throw ConditioningError("basis design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " of " +
                            std::to_string(design.cols()) + ")");
  const VectorXd w_active = qr.solve(z);

  MixedPrediction out;
  out.weights = VectorXd::Zero(phi.cols());
  for (std::size_t k = 0; k < active.size(); ++k) out.weights(active[k]) = w_active(static_cast<Index>(k));
  const VectorXd residual = z - phi * out.weights;
  out.linear = phi_test * out.weights;

  out.params = params;
  if (optimize && n >= 2) out.params = optimize_hyperparams(x2, residual, params).params;
  out.residual = gp_predict(x2, residual, test_x2, out.params, MeanFunction::Zero);
  out.combined.mean = out.linear + out.residual.mean;
  out.combined.cov = out.residual.cov;
  return out;
}

}  // namespace geodep
