#include "geodep/sample_model.hpp"

#include <cmath>
#include <string>

#include "geodep/errors.hpp"

namespace geodep {

void require_finite(const Eigen::Ref<const MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " contains non-finite values");
}

void SampleSet::validate(const MatrixXd& coords, const MatrixXd& covariates, const VectorXd& values) {
  const Index n = values.size();
  if (n < 1) throw ValidationError("sample set must contain at least one observation");
  if (coords.rows() != n || covariates.rows() != n)
    throw ValidationError("coordinates, covariates and values must share the same row count");
  if (coords.cols() < 1) throw ValidationError("sample set needs at least one coordinate column");
  require_finite(coords, "coordinates");
  require_finite(covariates, "covariates");
  require_finite(values, "values");
}

SampleSet::SampleSet(Unchecked, MatrixXd coords, MatrixXd covariates, VectorXd values)
    : coords_(std::move(coords)), covariates_(std::move(covariates)), values_(std::move(values)) {}

SampleSet::SampleSet(MatrixXd coords, MatrixXd covariates, VectorXd values)
    : SampleSet(Unchecked{}, std::move(coords), std::move(covariates), std::move(values)) {
  validate(coords_, covariates_, values_);
  if (coords_.cols() != 2 && coords_.cols() != 3)
    throw ValidationError("geographic coordinates must have 2 or 3 columns, got " +
                          std::to_string(coords_.cols()));
}

SampleSet::SampleSet(MatrixXd coords, VectorXd values)
    : SampleSet(coords, MatrixXd(coords.rows(), 0), std::move(values)) {}

SampleSet SampleSet::with_any_dimension(MatrixXd coords, MatrixXd covariates, VectorXd values) {
  validate(coords, covariates, values);
  return SampleSet(Unchecked{}, std::move(coords), std::move(covariates), std::move(values));
}

MatrixXd SampleSet::predictors() const {
  MatrixXd out(size(), spatial_dims() + covariate_dims());
  out << coords_, covariates_;
  return out;
}

SampleSet SampleSet::with_values(VectorXd values) const {
  if (values.size() != size()) throw ValidationError("replacement values have the wrong length");
  require_finite(values, "values");
  return SampleSet(Unchecked{}, coords_, covariates_, std::move(values));
}

SampleSet SampleSet::rows(const std::vector<Index>& indices) const {
  if (indices.empty()) throw ValidationError("row selection is empty");
  MatrixXd c(indices.size(), coords_.cols());
  MatrixXd x(indices.size(), covariates_.cols());
  VectorXd v(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= size()) throw ValidationError("row index out of range");
    c.row(k) = coords_.row(i);
    x.row(k) = covariates_.row(i);
    v(k) = values_(i);
  }
  return SampleSet(Unchecked{}, std::move(c), std::move(x), std::move(v));
}

MatrixXd cross_distances(const Eigen::Ref<const MatrixXd>& a, const Eigen::Ref<const MatrixXd>& b) {
  if (a.cols() != b.cols()) throw ValidationError("point sets have different dimensions");
  require_finite(a, "points");
  require_finite(b, "points");
  MatrixXd d(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) d(i, j) = (a.row(i) - b.row(j)).norm();
  return d;
}

DistanceMatrix pairwise_distances(const Eigen::Ref<const MatrixXd>& points) {
  if (points.rows() < 1) throw ValidationError("pairwise_distances needs at least one point");
  require_finite(points, "points");
  const Index n = points.rows();
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double dist = (points.row(i) - points.row(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return DistanceMatrix(std::move(d));
}

SampleSet augment_dimensions(const SampleSet& base, const Eigen::Ref<const MatrixXd>& extra) {
  if (extra.rows() != base.size())
    throw ValidationError("extra dimensions have " + std::to_string(extra.rows()) + " rows, expected " +
                          std::to_string(base.size()));
  require_finite(extra, "extra dimensions");
  if (extra.cols() == 0) return base;
  MatrixXd coords(base.size(), base.spatial_dims() + extra.cols());
  coords << base.coords(), extra;
  return SampleSet::with_any_dimension(std::move(coords), base.covariates(), base.values());
}

Standardized standardize_columns(const Eigen::Ref<const MatrixXd>& m) {
  require_finite(m, "matrix");
  Standardized out;
  out.mean = VectorXd::Zero(m.cols());
  out.scale = VectorXd::Ones(m.cols());
  if (m.rows() > 0) {
    out.mean = m.colwise().mean().transpose();
    for (Index c = 0; c < m.cols(); ++c) {
      if (m.col(c).maxCoeff() == m.col(c).minCoeff()) {
        // Constant column: centre on the exact value so it maps to zero.
        out.mean(c) = m(0, c);
        continue;
      }
      out.scale(c) = std::sqrt((m.col(c).array() - out.mean(c)).square().mean());
    }
  }
  out.data = out.apply(m);
  return out;
}

MatrixXd Standardized::apply(const Eigen::Ref<const MatrixXd>& m) const {
  MatrixXd out = m.rowwise() - mean.transpose();
  for (Index c = 0; c < out.cols(); ++c) out.col(c) /= scale(c);
  return out;
}

MatrixXd Standardized::restore(const Eigen::Ref<const MatrixXd>& m) const {
  MatrixXd out = m;
  for (Index c = 0; c < out.cols(); ++c) out.col(c) = out.col(c).array() * scale(c) + mean(c);
  return out;
}

}  // namespace geodep
