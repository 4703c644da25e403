#pragma once

#include <Eigen/Dense>
#include <vector>

namespace geodep {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Point observations: coordinates, optional non-spatial covariates and the
/// observed value at each point. Immutable once constructed.
///
/// Geographic sample sets carry 2 or 3 coordinate columns. Sets produced by
/// augment_dimensions() may carry more (geographic + learned dimensions).
class SampleSet {
 public:
  /// Validating constructor for geographic samples (2 or 3 coordinate columns).
  SampleSet(MatrixXd coords, MatrixXd covariates, VectorXd values);
  SampleSet(MatrixXd coords, VectorXd values);

  /// Same checks, but any coordinate width >= 1 is accepted.
  static SampleSet with_any_dimension(MatrixXd coords, MatrixXd covariates, VectorXd values);

  Index size() const noexcept { return values_.size(); }
  Index spatial_dims() const noexcept { return coords_.cols(); }
  Index covariate_dims() const noexcept { return covariates_.cols(); }

  const MatrixXd& coords() const noexcept { return coords_; }
  const MatrixXd& covariates() const noexcept { return covariates_; }
  const VectorXd& values() const noexcept { return values_; }

  /// [coords | covariates], the full predictor space.
  MatrixXd predictors() const;

  SampleSet with_values(VectorXd values) const;
  SampleSet rows(const std::vector<Index>& indices) const;

 private:
  struct Unchecked {};
  SampleSet(Unchecked, MatrixXd coords, MatrixXd covariates, VectorXd values);
  static void validate(const MatrixXd& coords, const MatrixXd& covariates, const VectorXd& values);

  MatrixXd coords_;
  MatrixXd covariates_;
  VectorXd values_;
};

/// Symmetric Euclidean distance matrix with zero diagonal.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(MatrixXd entries) : entries_(std::move(entries)) {}

  Index size() const noexcept { return entries_.rows(); }
  double operator()(Index i, Index j) const { return entries_(i, j); }
  const MatrixXd& entries() const noexcept { return entries_; }
  double max() const { return entries_.size() == 0 ? 0.0 : entries_.maxCoeff(); }

 private:
  MatrixXd entries_;
};

/// Throws ValidationError on any non-finite entry.
void require_finite(const Eigen::Ref<const MatrixXd>& m, const char* what);

DistanceMatrix pairwise_distances(const Eigen::Ref<const MatrixXd>& points);

/// Cross distances between the rows of `a` and the rows of `b`.
MatrixXd cross_distances(const Eigen::Ref<const MatrixXd>& a, const Eigen::Ref<const MatrixXd>& b);

/// Column-concatenates `extra` onto the coordinates of `base`.
SampleSet augment_dimensions(const SampleSet& base, const Eigen::Ref<const MatrixXd>& extra);

struct Standardized {
  MatrixXd data;
  VectorXd mean;
  VectorXd scale;  // 1 for constant columns

  MatrixXd restore(const Eigen::Ref<const MatrixXd>& m) const;
  MatrixXd apply(const Eigen::Ref<const MatrixXd>& m) const;
};

/// Per-column z-scores using the population standard deviation.
Standardized standardize_columns(const Eigen::Ref<const MatrixXd>& m);

}  // namespace geodep
