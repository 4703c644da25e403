#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geodep/errors.hpp"
#include "geodep/sample_model.hpp"

namespace geodep {

/// One unordered sample pair: separation h and semivariance v = (z_i - z_j)^2 / 2.
struct CloudPair {
  double h = 0.0;
  double v = 0.0;
  Index i = 0;
  Index j = 0;
};

/// All n(n-1)/2 pairs, ordered by (i, j) with i < j.
struct VariogramCloud {
  std::vector<CloudPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  double max_distance() const;
  /// Population variance of the semivariance values.
  double semivariance_variance() const;
};

struct VariogramBin {
  double h_center = 0.0;
  double gamma_mean = 0.0;
  std::size_t count = 0;
};

/// Non-empty bins sorted by strictly increasing h_center.
struct BinnedVariogram {
  std::vector<VariogramBin> bins;
  /// Upper edge of the binned distance range.
  double h_max = 0.0;

  std::size_t size() const noexcept { return bins.size(); }
};

enum class VariogramFamily { Gaussian, Exponential };

std::string_view to_string(VariogramFamily family);
/// Accepts "gaussian" / "exponential"; throws ValidationError otherwise.
VariogramFamily parse_family(std::string_view name);

/// Parametric semivariance model. The value at h = 0 is the nugget and the
/// large-lag limit is nugget + sill.
struct VariogramModel {
  VariogramFamily family = VariogramFamily::Gaussian;
  double sill = 1.0;
  double range = 1.0;
  double nugget = 0.0;

  /// Throws ValidationError unless sill > 0, range > 0, nugget >= 0.
  void validate() const;
  double operator()(double h) const;
};

VariogramCloud empirical_semivariance(const SampleSet& samples);
/// Cloud over an arbitrary point set (e.g. expanded coordinates).
VariogramCloud empirical_semivariance(const Eigen::Ref<const MatrixXd>& points,
                                      const Eigen::Ref<const VectorXd>& values);

/// Equal-width bins on [0, h_max]; pairs beyond h_max are dropped, empty bins omitted.
BinnedVariogram bin_cloud(const VariogramCloud& cloud, int n_bins, double h_max);

/// nugget + sill * (1 - exp(-3 h^2 / range^2))
double gaussian_variogram(double h, const VariogramModel& model);
/// nugget + sill * (1 - exp(-3 h / range))
double exponential_variogram(double h, const VariogramModel& model);

/// c(h) = nugget + sill - gamma(h) for h > 0; c(0) = sill (the nugget is
/// treated as a discontinuity at the origin).
double model_to_covariance(const VariogramModel& model, double h);

struct FitOptions {
  bool fit_nugget = false;
  int max_iters = 4000;
  /// Simplex size in log-parameter space. Much smaller values sink below the
  /// rounding noise of the loss once it is large.
  double size_tol = 1e-7;
};

struct FitResult {
  VariogramModel model;
  /// Count-weighted sum of squared residuals over the bins.
  double loss = 0.0;
  bool converged = false;
  /// Set when the binned semivariances are (near) constant; range is then fixed at h_max.
  bool flat_cloud = false;
  int iterations = 0;
  /// Best loss per iteration of the winning start.
  std::vector<double> trace;
};

/// sum_b count_b (gamma_b - model(h_b))^2
double weighted_fit_loss(const BinnedVariogram& binned, const VariogramModel& model);

/// Least-squares fit that never throws on non-convergence; inspect `converged`.
FitResult fit_variogram_result(const BinnedVariogram& binned, VariogramFamily family, const FitOptions& options = {});

class FitNonConvergence : public Error {
 public:
  explicit FitNonConvergence(FitResult best)
      : Error(ErrorKind::NonConvergence, "variogram fit did not converge"), best_(std::move(best)) {}
  const FitResult& best() const noexcept { return best_; }

 private:
  FitResult best_;
};

/// As fit_variogram_result but throws FitNonConvergence (carrying the
/// best-so-far parameters) when the simplex search does not converge.
FitResult fit_variogram(const BinnedVariogram& binned, VariogramFamily family, const FitOptions& options = {});

enum class WeightScheme { InverseDistance };

/// Global Moran's I with row-standardised weights.
double morans_i(const SampleSet& samples, WeightScheme scheme = WeightScheme::InverseDistance);

}  // namespace geodep
