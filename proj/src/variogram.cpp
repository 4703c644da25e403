#include "geodep/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geodep/optimize.hpp"

namespace geodep {

double VariogramCloud::max_distance() const {
  double m = 0.0;
  for (const auto& p : pairs) m = std::max(m, p.h);
  return m;
}

double VariogramCloud::semivariance_variance() const {
  if (pairs.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& p : pairs) mean += p.v;
  mean /= static_cast<double>(pairs.size());
  double var = 0.0;
  for (const auto& p : pairs) var += (p.v - mean) * (p.v - mean);
  return var / static_cast<double>(pairs.size());
}

std::string_view to_string(VariogramFamily family) {
  return family == VariogramFamily::Gaussian ? "gaussian" : "exponential";
}

VariogramFamily parse_family(std::string_view name) {
  if (name == "gaussian") return VariogramFamily::Gaussian;
  if (name == "exponential") return VariogramFamily::Exponential;
  throw ValidationError("unknown variogram family '" + std::string(name) + "'");
}

void VariogramModel::validate() const {
  if (!(sill > 0.0) || !(range > 0.0) || !(nugget >= 0.0) || !std::isfinite(sill) || !std::isfinite(range) ||
      !std::isfinite(nugget))
    throw ValidationError("variogram model requires sill > 0, range > 0 and nugget >= 0");
}

double gaussian_variogram(double h, const VariogramModel& model) {
  const double r = h / model.range;
  return model.nugget + model.sill * -std::expm1(-3.0 * r * r);
}

double exponential_variogram(double h, const VariogramModel& model) {
  return model.nugget + model.sill * -std::expm1(-3.0 * h / model.range);
}

double VariogramModel::operator()(double h) const {
  return family == VariogramFamily::Gaussian ? gaussian_variogram(h, *this) : exponential_variogram(h, *this);
}

double model_to_covariance(const VariogramModel& model, double h) {
  if (h <= 0.0) return model.sill;
  // nugget + sill - gamma(h), written without cancellation.
  const double r = h / model.range;
  const double decay = model.family == VariogramFamily::Gaussian ? std::exp(-3.0 * r * r) : std::exp(-3.0 * r);
  return model.sill * decay;
}

VariogramCloud empirical_semivariance(const Eigen::Ref<const MatrixXd>& points,
                                      const Eigen::Ref<const VectorXd>& values) {
  const Index n = values.size();
  if (points.rows() != n) throw ValidationError("points and values have different lengths");
  if (n < 2) throw ValidationError("semivariance needs at least two samples");
  require_finite(points, "points");
  require_finite(values, "values");

  VariogramCloud cloud;
  cloud.pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double dz = values(i) - values(j);
      cloud.pairs.push_back({(points.row(i) - points.row(j)).norm(), 0.5 * dz * dz, i, j});
    }
  }
  return cloud;
}

VariogramCloud empirical_semivariance(const SampleSet& samples) {
  return empirical_semivariance(samples.coords(), samples.values());
}

BinnedVariogram bin_cloud(const VariogramCloud& cloud, int n_bins, double h_max) {
  if (n_bins < 1) throw ValidationError("bin count must be at least 1");
  if (!(h_max > 0.0) || !std::isfinite(h_max)) throw ValidationError("h_max must be positive and finite");

  const double width = h_max / n_bins;
  std::vector<double> sums(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_bins), 0);
  for (const auto& p : cloud.pairs) {
    if (p.h > h_max) continue;
    const auto b = std::min(static_cast<std::size_t>(p.h / width), static_cast<std::size_t>(n_bins - 1));
    sums[b] += p.v;
    ++counts[b];
  }

  BinnedVariogram out;
  out.h_max = h_max;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] == 0) continue;
    out.bins.push_back({(static_cast<double>(b) + 0.5) * width, sums[b] / static_cast<double>(counts[b]), counts[b]});
  }
  if (out.bins.empty()) throw ValidationError("no variogram pairs fall within h_max");
  return out;
}

double weighted_fit_loss(const BinnedVariogram& binned, const VariogramModel& model) {
  double loss = 0.0;
  for (const auto& b : binned.bins) {
    const double r = b.gamma_mean - model(b.h_center);
    loss += static_cast<double>(b.count) * r * r;
  }
  return loss;
}

namespace {

VariogramModel decode(const Eigen::VectorXd& x, VariogramFamily family, bool fit_nugget) {
  VariogramModel m;
  m.family = family;
  m.sill = std::exp(x(0));
  m.range = std::exp(x(1));
  m.nugget = fit_nugget ? std::max(0.0, x(2)) : 0.0;
  return m;
}

}  // namespace

FitResult fit_variogram_result(const BinnedVariogram& binned, VariogramFamily family, const FitOptions& options) {
  if (binned.bins.size() < 3) throw ValidationError("variogram fit needs at least 3 bins");
  const double h_max = binned.h_max > 0.0 ? binned.h_max : binned.bins.back().h_center;

  double total = 0.0;
  double weighted_mean = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& b : binned.bins) {
    total += static_cast<double>(b.count);
    weighted_mean += static_cast<double>(b.count) * b.gamma_mean;
    lo = std::min(lo, b.gamma_mean);
    hi = std::max(hi, b.gamma_mean);
  }
  weighted_mean /= total;

  FitResult result;
  if (hi - lo <= 1e-6 * std::abs(weighted_mean) || hi == lo) {
    result.flat_cloud = true;
    result.converged = true;
    result.model = {family, weighted_mean > 0.0 ? weighted_mean : std::numeric_limits<double>::min(), h_max, 0.0};
    result.loss = weighted_fit_loss(binned, result.model);
    result.trace.push_back(result.loss);
    return result;
  }

  const bool fit_nugget = options.fit_nugget;
  const Objective objective = [&](const Eigen::VectorXd& x) {
    return weighted_fit_loss(binned, decode(x, family, fit_nugget));
  };

  const Eigen::Index dim = fit_nugget ? 3 : 2;
  Eigen::VectorXd step(dim);
  step << 0.5, 0.5;
  if (fit_nugget) step(2) = 0.1 * weighted_mean;
  SimplexOptions simplex{options.max_iters, options.size_tol, step};

  OptimizeResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (double fraction : {0.25, 0.5, 1.0}) {
    Eigen::VectorXd x0(dim);
    x0(0) = std::log(weighted_mean);
    x0(1) = std::log(fraction * h_max);
    if (fit_nugget) x0(2) = 0.0;
    OptimizeResult r = minimize_simplex(objective, x0, simplex);
    if (r.value < best.value) best = std::move(r);
  }
  // Restart once from the winner with a fresh simplex; Nelder-Mead can stall on a collapsed simplex.
  OptimizeResult polished = minimize_simplex(objective, best.x, simplex);
  if (polished.value <= best.value) {
    best.trace.insert(best.trace.end(), polished.trace.begin(), polished.trace.end());
    best.x = polished.x;
    best.value = polished.value;
    best.iterations += polished.iterations;
    best.converged = polished.converged;
  }

  result.model = decode(best.x, family, fit_nugget);
  result.loss = best.value;
  result.converged = best.converged;
  result.iterations = best.iterations;
  result.trace = std::move(best.trace);
  return result;
}

FitResult fit_variogram(const BinnedVariogram& binned, VariogramFamily family, const FitOptions& options) {
  FitResult r = fit_variogram_result(binned, family, options);
  if (!r.converged) throw FitNonConvergence(std::move(r));
  return r;
}

double morans_i(const SampleSet& samples, WeightScheme scheme) {
  (void)scheme;  // only inverse-distance weights are defined
  const Index n = samples.size();
  if (n < 3) throw ValidationError("Moran's I needs at least three samples");
  const VectorXd& z = samples.values();
  const VectorXd dev = z.array() - z.mean();
  const double denom = dev.squaredNorm();
  if (!(denom > 0.0)) throw ValidationError("Moran's I is undefined for a constant field");

  const MatrixXd d = pairwise_distances(samples.coords()).entries();
  double numer = 0.0;
  for (Index i = 0; i < n; ++i) {
    double row_sum = 0.0;
    double row_cross = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (!(d(i, j) > 0.0)) throw ValidationError("inverse-distance weights are undefined for coincident samples");
      const double w = 1.0 / d(i, j);
      row_sum += w;
      row_cross += w * dev(j);
    }
    numer += dev(i) * row_cross / row_sum;
  }
  // Row-standardised weights sum to n, so the n / S0 factor is 1.
  return numer / denom;
}

}  // namespace geodep
