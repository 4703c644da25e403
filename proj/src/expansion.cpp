#include "geodep/expansion.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "geodep/linalg.hpp"
#include "geodep/optimize.hpp"
#include "geodep/regression.hpp"

namespace geodep {

void ExpansionConfig::validate() const {
  if (p < 1) throw ValidationError("expansion needs at least one latent dimension");
  if (lambda && !(*lambda >= 0.0)) throw ValidationError("ridge weight must be non-negative");
  if (!(tolerance > 0.0)) throw ValidationError("tolerance must be positive");
  if (max_iters < 1 || inner_iters < 1) throw ValidationError("iteration limits must be positive");
  if (n_bins < 3) throw ValidationError("expansion needs at least 3 variogram bins");
}

CoordinateFrame CoordinateFrame::fit(const Eigen::Ref<const MatrixXd>& predictors) {
  CoordinateFrame f;
  f.center = predictors.colwise().mean().transpose();
  const MatrixXd centred = predictors.rowwise() - f.center.transpose();
  const double pooled = predictors.cols() > 0 ? std::sqrt(centred.array().square().colwise().mean().mean()) : 0.0;
  f.scale = pooled > 0.0 ? pooled : 1.0;
  return f;
}

MatrixXd CoordinateFrame::apply(const Eigen::Ref<const MatrixXd>& points) const {
  if (points.cols() > center.size()) throw ValidationError("points have more columns than the coordinate frame");
  return (points.rowwise() - center.head(points.cols()).transpose()) / scale;
}

SampleSet CoordinateFrame::normalize(const SampleSet& samples) const {
  return SampleSet::with_any_dimension(apply(samples.predictors()), MatrixXd(samples.size(), 0), samples.values());
}

namespace {

// Pairwise data that does not change while Z' and phi move.
class PairProblem {
 public:
  explicit PairProblem(const SampleSet& samples) : n_(samples.size()) {
    base_d2_ = pairwise_distances(samples.predictors()).entries().array().square();
    const VectorXd& z = samples.values();
    vstar_.resize(n_, n_);
    for (Index j = 0; j < n_; ++j)
      for (Index i = 0; i < n_; ++i) vstar_(i, j) = 0.5 * (z(i) - z(j)) * (z(i) - z(j));
  }

  Index size() const { return n_; }
  double base_d2(Index i, Index j) const { return base_d2_(i, j); }
  double vstar(Index i, Index j) const { return vstar_(i, j); }

  double distance(const Eigen::Ref<const MatrixXd>& zp, Index i, Index j) const {
    return std::sqrt(base_d2_(i, j) + (zp.row(i) - zp.row(j)).squaredNorm());
  }

  double objective(const Eigen::Ref<const MatrixXd>& zp, const VariogramModel& phi, double lambda) const {
    check(zp);
    double sum = 0.0;
    for (Index j = 0; j < n_; ++j) {
      for (Index i = 0; i < j; ++i) {
        const double r = vstar_(i, j) - phi(distance(zp, i, j));
        sum += r * r;
      }
    }
    return sum + lambda * zp.squaredNorm();
  }

  ExpansionGradient gradient(const Eigen::Ref<const MatrixXd>& zp, const VariogramModel& phi, double lambda) const {
    check(zp);
    ExpansionGradient g;
    g.z_prime = 2.0 * lambda * zp;
    const bool gaussian = phi.family == VariogramFamily::Gaussian;
    const double a = phi.range;
    for (Index j = 0; j < n_; ++j) {
      for (Index i = 0; i < j; ++i) {
        const double d = distance(zp, i, j);
        const double r = vstar_(i, j) - phi(d);
        double decay;
        double slope_over_d;  // (d gamma / d d) / d
        double dgamma_dlog_range;
        if (gaussian) {
          decay = std::exp(-3.0 * d * d / (a * a));
          slope_over_d = phi.sill * decay * 6.0 / (a * a);
          dgamma_dlog_range = -phi.sill * decay * 6.0 * d * d / (a * a);
        } else {
          decay = std::exp(-3.0 * d / a);
          slope_over_d = d > 0.0 ? phi.sill * decay * 3.0 / (a * d) : 0.0;
          dgamma_dlog_range = -phi.sill * decay * 3.0 * d / a;
        }
        const double dgamma_dlog_sill = -phi.sill * std::expm1(gaussian ? -3.0 * d * d / (a * a) : -3.0 * d / a);

        g.log_sill += -2.0 * r * dgamma_dlog_sill;
        g.log_range += -2.0 * r * dgamma_dlog_range;
        g.nugget += -2.0 * r;
        if (d > 0.0) {
          const double c = -2.0 * r * slope_over_d;
          const Eigen::RowVectorXd diff = zp.row(i) - zp.row(j);
          g.z_prime.row(i) += c * diff;
          g.z_prime.row(j) -= c * diff;
        }
      }
    }
    return g;
  }

 private:
  void check(const Eigen::Ref<const MatrixXd>& zp) const {
    if (zp.rows() != n_) throw ValidationError("latent coordinates have the wrong number of rows");
    require_finite(zp, "latent coordinates");
  }

  Index n_;
  MatrixXd base_d2_;
  MatrixXd vstar_;
};

// Ridge weight per unit variance of the semivariance cloud.
constexpr double kDefaultRidge = 1e-3;
// Upper bound on the sill, relative to the largest observed semivariance.
constexpr double kSillCapFactor = 2.0;

MatrixXd expanded_points(const MatrixXd& base, const MatrixXd& zp) {
  MatrixXd out(base.rows(), base.cols() + zp.cols());
  out << base, zp;
  return out;
}

void centre_columns(MatrixXd& zp) { zp.rowwise() -= zp.colwise().mean(); }

FitResult fit_on_points(const MatrixXd& points, const VectorXd& values, int n_bins) {
  const VariogramCloud cloud = empirical_semivariance(points, values);
  double h_max = cloud.max_distance();
  if (!(h_max > 0.0)) h_max = 1.0;
  BinnedVariogram binned = bin_cloud(cloud, n_bins, h_max);
  if (binned.size() < 3) {
    // Too few occupied bins to fit three parameters; fall back to a finer grid.
    binned = bin_cloud(cloud, std::max(3 * n_bins, 30), h_max);
  }
  return fit_variogram_result(binned, VariogramFamily::Gaussian);
}


// Least-squares sill for a Gaussian variogram with fixed range and no nugget.
double profiled_sill(const PairProblem& problem, const MatrixXd& zp, double range) {
  double num = 0.0;
  double den = 0.0;
  for (Index j = 0; j < problem.size(); ++j)
    for (Index i = 0; i < j; ++i) {
      const double d = problem.distance(zp, i, j);
      const double g = -std::expm1(-3.0 * d * d / (range * range));
      num += problem.vstar(i, j) * g;
      den += g * g;
    }
  return den > 0.0 && num > 0.0 ? num / den : std::numeric_limits<double>::min();
}

// Range search on [1e-2, 2] x the largest expanded distance: log-spaced scan,
// then golden-section refinement around the best scan point.
VariogramModel profile_range(const PairProblem& problem, const MatrixXd& zp, const VariogramModel& fallback,
                             double lambda, double sill_cap) {
  double h_max = 0.0;
  for (Index j = 0; j < problem.size(); ++j)
    for (Index i = 0; i < j; ++i) h_max = std::max(h_max, problem.distance(zp, i, j));
  if (!(h_max > 0.0)) return fallback;

  auto model_at = [&](double log_range) {
    const double range = std::exp(log_range);
    return VariogramModel{VariogramFamily::Gaussian, std::min(profiled_sill(problem, zp, range), sill_cap), range, 0.0};
  };
  auto value_at = [&](double log_range) { return problem.objective(zp, model_at(log_range), lambda); };

  const double lo = std::log(1e-2 * h_max);
  const double hi = std::log(2.0 * h_max);
  constexpr int kScan = 60;
  const double step = (hi - lo) / kScan;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double v = value_at(lo + k * step);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  double a = lo + std::max(0, best - 1) * step;
  double b = lo + std::min(kScan, best + 1) * step;
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = value_at(x1);
  double f2 = value_at(x2);
  for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = value_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = value_at(x2);
    }
  }
  const double refined = f1 < f2 ? x1 : x2;
  return value_at(refined) < best_value ? model_at(refined) : model_at(lo + best * step);
}

// Start along the directions in which the objective first decreases when Z'
// leaves zero: the leading eigenvectors of the Laplacian whose edge weights are
// residual x curvature of each pair. Seeded noise breaks ties.
MatrixXd initial_latent(const PairProblem& problem, const VariogramModel& phi, Index p, std::uint64_t seed) {
  const Index n = problem.size();
  MatrixXd laplacian = MatrixXd::Zero(n, n);
  const double a2 = phi.range * phi.range;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      const double d2 = problem.base_d2(i, j);
      const double residual = problem.vstar(i, j) - phi(std::sqrt(d2));
      const double curvature = phi.sill * 3.0 / a2 * std::exp(-3.0 * d2 / a2);
      const double w = residual * curvature;
      laplacian(i, j) -= w;
      laplacian(j, i) -= w;
      laplacian(i, i) += w;
      laplacian(j, j) += w;
    }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(laplacian);

  std::mt19937_64 rng(seed + 2);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd zp(n, p);
  for (Index c = 0; c < p; ++c) {
    const Index k = n - 1 - std::min(c, n - 1);
    VectorXd col = es.eigenvectors().col(k);
    col *= 1e-2 / std::max(std::sqrt((col.array() - col.mean()).square().mean()), 1e-300);
    for (Index i = 0; i < n; ++i) col(i) += 1e-4 * normal(rng);
    zp.col(c) = col;
  }
  centre_columns(zp);
  return zp;
}

}  // namespace

namespace {

void require_ridge(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge weight must be finite and non-negative");
}

}  // namespace

double expansion_objective(const Eigen::Ref<const MatrixXd>& z_prime, const VariogramModel& phi,
                           const SampleSet& samples, double lambda) {
  phi.validate();
  require_ridge(lambda);
  return PairProblem(samples).objective(z_prime, phi, lambda);
}

ExpansionGradient expansion_gradient(const Eigen::Ref<const MatrixXd>& z_prime, const VariogramModel& phi,
                                     const SampleSet& samples, double lambda) {
  phi.validate();
  require_ridge(lambda);
  return PairProblem(samples).gradient(z_prime, phi, lambda);
}

namespace {

struct RunState {
  MatrixXd zp;
  VariogramModel phi;
  double value = 0.0;
  std::vector<TracePoint> trace;
  bool converged = false;
};

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// One alternating-minimisation run from a given start.
class ExpansionSolver {
 public:
  ExpansionSolver(const PairProblem& problem, const MatrixXd& base, const VectorXd& values,
                  const ExpansionConfig& config, double lambda, double sill_cap)
      : problem_(problem), base_(base), values_(values), config_(config), lambda_(lambda), sill_cap_(sill_cap) {}

  RunState run(MatrixXd zp, VariogramModel phi) const {
    RunState state;
    state.zp = std::move(zp);
    phi.sill = std::min(phi.sill, kSillMargin * sill_cap_);
    state.phi = phi;
    state.value = problem_.objective(state.zp, state.phi, lambda_);
    state.trace.push_back({0, state.value});
    for (int iter = 1; iter <= config_.max_iters; ++iter) {
      const double previous = state.value;
      update_phi(state);
      update_latent(state);
      state.trace.push_back({iter, state.value});
      if (previous - state.value <= config_.tolerance * std::max(std::abs(previous), 1e-300)) {
        state.converged = true;
        break;
      }
    }
    return state;
  }

 private:
  static constexpr double kSillMargin = 1.0 - 1e-9;

  void offer(RunState& state, const VariogramModel& m) const {
    if (!(m.sill > 0.0) || m.sill > sill_cap_ || !(m.range > 0.0)) return;
    const double value = problem_.objective(state.zp, m, lambda_);
    if (value < state.value) {
      state.phi = m;
      state.value = value;
    }
  }

  // Variogram half-step: binned least-squares fit on the expanded cloud, and the
  // pair-objective optimum over a bounded range with the sill profiled out.
  void update_phi(RunState& state) const {
    const MatrixXd expanded = expanded_points(base_, state.zp);
    VariogramModel binned = fit_on_points(expanded, values_, config_.n_bins).model;
    binned.nugget = 0.0;
    offer(state, binned);
    offer(state, profile_range(problem_, state.zp, state.phi, lambda_, sill_cap_));
  }

  // Latent half-step. The variogram parameters move with Z' here: with them
  // frozen, pairs far out in the flat tail of the Gaussian model get no gradient.
  void update_latent(RunState& state) const {
    const Index n = problem_.size();
    const Index p = state.zp.cols();
    const Index nz = n * p;
    auto unpack = [&](const Eigen::VectorXd& x) { return Eigen::Map<const MatrixXd>(x.data(), n, p); };
    auto model = [&](const Eigen::VectorXd& x) {
      return VariogramModel{VariogramFamily::Gaussian, sill_cap_ * logistic(x(nz)), std::exp(x(nz + 1)), 0.0};
    };

    Eigen::VectorXd x0(nz + 2);
    x0.head(nz) = Eigen::Map<const Eigen::VectorXd>(state.zp.data(), nz);
    const double t = std::min(state.phi.sill / sill_cap_, kSillMargin);
    x0(nz) = std::log(t / (1.0 - t));
    x0(nz + 1) = std::log(state.phi.range);

    OptimizeResult r;
    if (config_.optimizer == LatentOptimizer::Gradient) {
      const ObjectiveWithGradient f = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
        const auto zp = unpack(x);
        const VariogramModel m = model(x);
        if (grad) {
          const ExpansionGradient g = problem_.gradient(zp, m, lambda_);
          grad->resize(x.size());
          grad->head(nz) = Eigen::Map<const Eigen::VectorXd>(g.z_prime.data(), nz);
          (*grad)(nz) = g.log_sill * (1.0 - logistic(x(nz)));
          (*grad)(nz + 1) = g.log_range;
        }
        return problem_.objective(zp, m, lambda_);
      };
      GradientOptions opts;
      opts.max_iters = config_.inner_iters;
      opts.grad_tol = 1e-10;
      r = minimize_bfgs(f, x0, opts);
    } else {
      const Objective f = [&](const Eigen::VectorXd& x) { return problem_.objective(unpack(x), model(x), lambda_); };
      SimplexOptions opts;
      opts.max_iters = config_.inner_iters * static_cast<int>(nz + 2);
      opts.size_tol = 1e-8;
      opts.initial_step = Eigen::VectorXd::Constant(nz + 2, 0.1);
      r = minimize_simplex(f, x0, opts);
    }

    MatrixXd zp = unpack(r.x);
    // Centring keeps every distance and can only shrink the ridge term.
    centre_columns(zp);
    const VariogramModel m = model(r.x);
    const double value = problem_.objective(zp, m, lambda_);
    if (value < state.value) {
      state.zp = std::move(zp);
      state.phi = m;
      state.value = value;
    }
  }

  const PairProblem& problem_;
  const MatrixXd& base_;
  const VectorXd& values_;
  const ExpansionConfig& config_;
  double lambda_;
  double sill_cap_;
};

// Classical scaling of the extra squared distance each pair needs so that
// v*_ij grows linearly with squared expanded distance.
MatrixXd scaling_start(const PairProblem& problem, Index p) {
  const Index n = problem.size();
  double mean_d2 = 0.0;
  double mean_v = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) {
      mean_d2 += problem.base_d2(i, j);
      mean_v += problem.vstar(i, j);
    }
  const double k = mean_v > 0.0 ? mean_d2 / mean_v : 0.0;
  MatrixXd extra = MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < j; ++i) extra(i, j) = extra(j, i) = std::max(0.0, k * problem.vstar(i, j) - problem.base_d2(i, j));
  const MatrixXd centring = MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const MatrixXd gram = -0.5 * centring * extra * centring;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  MatrixXd zp = MatrixXd::Zero(n, p);
  for (Index c = 0; c < std::min(p, n); ++c) {
    const Index k_idx = n - 1 - c;
    zp.col(c) = es.eigenvectors().col(k_idx) * std::sqrt(std::max(es.eigenvalues()(k_idx), 0.0));
  }
  return zp;
}

}  // namespace

namespace {

struct Prepared {
  SampleSet normalized;
  MatrixXd base;
  double lambda = 0.0;
  double sill_cap = 0.0;
  VariogramModel geographic;
};

Prepared prepare(const SampleSet& samples, const ExpansionConfig& config, const CoordinateFrame& frame) {
  Prepared out{frame.normalize(samples), {}, 0.0, 0.0, {}};
  out.base = out.normalized.coords();
  const VectorXd& values = out.normalized.values();
  const VariogramCloud cloud = empirical_semivariance(out.base, values);
  out.lambda = config.lambda ? *config.lambda : kDefaultRidge * cloud.semivariance_variance();
  double max_v = 0.0;
  for (const auto& pair : cloud.pairs) max_v = std::max(max_v, pair.v);
  out.sill_cap = kSillCapFactor * max_v;

  const PairProblem problem(out.normalized);
  VariogramModel phi = fit_on_points(out.base, values, config.n_bins).model;
  phi.nugget = 0.0;
  phi.sill = std::min(phi.sill, out.sill_cap);
  out.geographic = profile_range(problem, MatrixXd::Zero(samples.size(), config.p), phi, out.lambda, out.sill_cap);
  return out;
}

}  // namespace

Expansion learn_expansion(const SampleSet& samples, const ExpansionConfig& config) {
  config.validate();
  const Index n = samples.size();
  if (n < 4) throw ValidationError("dimension expansion needs at least 4 samples");
  if (samples.values().maxCoeff() == samples.values().minCoeff())
    throw ValidationError("dimension expansion is undefined for a constant field");

  Expansion result;
  result.frame = CoordinateFrame::fit(samples.predictors());
  const Prepared prep = prepare(samples, config, result.frame);
  result.lambda = prep.lambda;
  const PairProblem problem(prep.normalized);
  const Index p = config.p;

  std::mt19937_64 rng(config.seed + 2);
  std::normal_distribution<double> normal(0.0, 1e-2);
  MatrixXd noise(n, p);
  for (Index c = 0; c < p; ++c)
    for (Index i = 0; i < n; ++i) noise(i, c) = normal(rng);

  std::vector<MatrixXd> starts;
  starts.push_back(noise);
  starts.push_back(initial_latent(problem, prep.geographic, p, config.seed));
  starts.push_back(scaling_start(problem, p) + noise);

  const ExpansionSolver solver(problem, prep.base, prep.normalized.values(), config, prep.lambda, prep.sill_cap);
  RunState best;
  best.value = std::numeric_limits<double>::infinity();
  for (MatrixXd& start : starts) {
    centre_columns(start);
    RunState run = solver.run(std::move(start), prep.geographic);
    if (run.value < best.value) best = std::move(run);
  }

  result.z_prime = std::move(best.zp);
  result.phi_hat = best.phi;
  result.trace = std::move(best.trace);
  result.converged = best.converged;
  return result;
}


StationarityReport stationarity_report(const SampleSet& samples, const Expansion& expansion, int n_bins) {
  if (expansion.z_prime.rows() != samples.size()) throw ValidationError("expansion does not match the sample set");
  const SampleSet normalized = expansion.frame.normalize(samples);
  const MatrixXd& base = normalized.coords();
  const MatrixXd expanded = expanded_points(base, expansion.z_prime);

  StationarityReport report;
  report.geographic_cloud = empirical_semivariance(base, normalized.values());
  report.expanded_cloud = empirical_semivariance(expanded, normalized.values());
  report.geographic_binned = bin_cloud(report.geographic_cloud, n_bins, report.geographic_cloud.max_distance());
  report.expanded_binned = bin_cloud(report.expanded_cloud, n_bins, report.expanded_cloud.max_distance());
  report.geographic_fit = fit_variogram_result(report.geographic_binned, VariogramFamily::Gaussian);
  report.expanded_fit = fit_variogram_result(report.expanded_binned, VariogramFamily::Gaussian);
  report.geographic_residual = report.geographic_fit.loss;
  report.expanded_residual = report.expanded_fit.loss;
  report.improvement_ratio =
      report.geographic_residual > 0.0 ? report.expanded_residual / report.geographic_residual : 1.0;

  const MatrixXd d = pairwise_distances(expanded).entries();
  MatrixXd cov(d.rows(), d.cols());
  for (Index j = 0; j < d.cols(); ++j)
    for (Index i = 0; i < d.rows(); ++i) cov(i, j) = model_to_covariance(expansion.phi_hat, d(i, j));
  report.min_covariance_eigenvalue = min_eigenvalue(cov);
  report.psd_witness = report.min_covariance_eigenvalue >= -1e-10;
  return report;
}

MatrixXd interpolate_latent(const SampleSet& samples, const Expansion& expansion,
                            const Eigen::Ref<const MatrixXd>& grid) {
  if (expansion.z_prime.rows() != samples.size()) throw ValidationError("expansion does not match the sample set");
  if (grid.cols() != samples.spatial_dims()) throw ValidationError("grid dimension does not match the coordinates");
  const MatrixXd train = expansion.frame.apply(samples.coords());
  const MatrixXd test = expansion.frame.apply(grid);

  MatrixXd out(grid.rows(), expansion.z_prime.cols());
  for (Index c = 0; c < expansion.z_prime.cols(); ++c) {
    const VectorXd target = expansion.z_prime.col(c);
    const double var = (target.array() - target.mean()).square().mean();
    if (!(var > 0.0)) {
      out.col(c).setConstant(target.mean());
      continue;
    }
    HyperparamOptions opts;
    opts.fit_noise = false;
    opts.mean_fn = MeanFunction::Constant;
    const KernelParams init{var, 0.5, 1e-8 * var};
    const KernelParams params = optimize_hyperparams(train, target, init, opts).params;
    out.col(c) = gp_predict(train, target, test, params, MeanFunction::Constant).mean;
  }
  return out;
}

}  // namespace geodep
