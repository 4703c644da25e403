#include "geodep/linalg.hpp"

#include <array>
#include <cmath>

#include "geodep/errors.hpp"

namespace geodep {

Eigen::MatrixXd SpdFactor::whiten(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  return llt_.matrixL().solve(rhs);
}

double SpdFactor::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

SpdFactor factorize_spd(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.rows() != a.cols()) throw ConditioningError("factorize_spd: matrix is not square");
  if (!a.allFinite()) throw ConditioningError("factorize_spd: matrix has non-finite entries");
  const Eigen::Index n = a.rows();
  double reference = n > 0 ? a.diagonal().mean() : 1.0;
  if (!(reference > 0.0)) reference = 1.0;

  // 1e-10, ~2.2e-9, ~4.6e-8, 1e-6
  constexpr std::array<double, 4> kExponents{-10.0, -10.0 + 4.0 / 3.0, -10.0 + 8.0 / 3.0, -6.0};
  for (double e : kExponents) {
    const double jitter = std::pow(10.0, e) * reference;
    Eigen::MatrixXd work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 0.0) {
      return SpdFactor(std::move(llt), jitter);
    }
  }
  throw ConditioningError("matrix is not positive definite even after maximum diagonal jitter");
}

void clean_covariance(Eigen::MatrixXd& cov, double tol) {
  cov = 0.5 * (cov + cov.transpose()).eval();
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) < -tol) throw ConditioningError("predictive covariance has a negative variance");
    if (cov(i, i) < 0.0) cov(i, i) = 0.0;
  }
}

double min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace geodep
