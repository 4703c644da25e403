#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "geodep/variogram.hpp"

namespace geodep {

enum class LatentOptimizer { Gradient, Simplex };

struct ExpansionConfig {
  /// Number of learned dimensions.
  int p = 1;
  /// Ridge weight on ||Z'||_F^2; unset means 1e-3 x variance of the semivariance cloud.
  std::optional<double> lambda;
  LatentOptimizer optimizer = LatentOptimizer::Gradient;
  /// Outer alternating iterations.
  int max_iters = 100;
  /// Stop when the relative objective change of an outer iteration drops below this.
  double tolerance = 1e-7;
  std::uint64_t seed = 42;
  /// Bins used for the variogram-fit half of each iteration.
  int n_bins = 10;
  /// Iteration cap for each latent-coordinate update.
  int inner_iters = 200;

  void validate() const;
};

/// Isotropic standardisation of the predictor columns: each column is centred
/// and all columns are divided by one common scale so distances keep their shape.
struct CoordinateFrame {
  VectorXd center;
  double scale = 1.0;

  static CoordinateFrame fit(const Eigen::Ref<const MatrixXd>& predictors);
  /// Applies the leading `cols` entries of the frame to `points`.
  MatrixXd apply(const Eigen::Ref<const MatrixXd>& points) const;
  /// Predictors of `samples` mapped into the frame, as a coordinate-only sample set.
  SampleSet normalize(const SampleSet& samples) const;
};

struct TracePoint {
  int iteration = 0;
  double objective = 0.0;
};

struct Expansion {
  /// n x p latent coordinates in frame units, column means zero.
  MatrixXd z_prime;
  VariogramModel phi_hat;
  std::vector<TracePoint> trace;
  bool converged = false;
  double lambda = 0.0;
  CoordinateFrame frame;
};

/// sum_{i<j} (v*_ij - gamma_phi(d_ij))^2 + lambda ||Z'||_F^2 with d_ij taken in
/// [predictors | Z'] space.
double expansion_objective(const Eigen::Ref<const MatrixXd>& z_prime, const VariogramModel& phi,
                           const SampleSet& samples, double lambda);

struct ExpansionGradient {
  MatrixXd z_prime;
  double log_sill = 0.0;
  double log_range = 0.0;
  double nugget = 0.0;
};

/// Analytic gradient of expansion_objective. Pairs at zero distance contribute
/// nothing to the latent-coordinate gradient.
ExpansionGradient expansion_gradient(const Eigen::Ref<const MatrixXd>& z_prime, const VariogramModel& phi,
                                     const SampleSet& samples, double lambda);

/// Alternating minimisation from several deterministic starts: refit the Gaussian
/// variogram on the current expanded cloud, then move Z' jointly with sill and
/// range. Steps are kept only when they lower the objective; the best
/// run is returned.
Expansion learn_expansion(const SampleSet& samples, const ExpansionConfig& config = {});

struct StationarityReport {
  VariogramCloud geographic_cloud;
  VariogramCloud expanded_cloud;
  BinnedVariogram geographic_binned;
  BinnedVariogram expanded_binned;
  FitResult geographic_fit;
  FitResult expanded_fit;
  double geographic_residual = 0.0;
  double expanded_residual = 0.0;
  /// expanded_residual / geographic_residual
  double improvement_ratio = 1.0;
  /// Smallest eigenvalue of the Gaussian covariance matrix over expanded coordinates.
  double min_covariance_eigenvalue = 0.0;
  bool psd_witness = false;
};

StationarityReport stationarity_report(const SampleSet& samples, const Expansion& expansion, int n_bins = 10);

/// GP interpolation of each latent column over the geographic coordinates.
/// `grid` holds points in the original coordinate units (g x spatial dims).
MatrixXd interpolate_latent(const SampleSet& samples, const Expansion& expansion,
                            const Eigen::Ref<const MatrixXd>& grid);

}  // namespace geodep
