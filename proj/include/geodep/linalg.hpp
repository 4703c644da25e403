#pragma once

#include <Eigen/Dense>

namespace geodep {

/// Cholesky factor of a symmetric positive-definite matrix, together with the
/// diagonal jitter that was needed to obtain it.
class SpdFactor {
 public:
  SpdFactor(Eigen::LLT<Eigen::MatrixXd> llt, double jitter) : llt_(std::move(llt)), jitter_(jitter) {}

  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const { return llt_.solve(rhs); }
  /// L^{-1} rhs
  Eigen::MatrixXd whiten(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;
  Eigen::MatrixXd lower() const { return llt_.matrixL(); }
  double log_det() const;
  /// Absolute diagonal jitter added before the successful factorization.
  double jitter() const noexcept { return jitter_; }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_;
};

/// Relative jitter schedule: 1e-10 of the mean diagonal, escalated three times
/// up to 1e-6. Throws ConditioningError when every attempt fails.
SpdFactor factorize_spd(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Symmetrizes and clips slightly negative diagonal entries (>= -tol) to zero.
/// Throws ConditioningError when a diagonal entry is below -tol.
void clean_covariance(Eigen::MatrixXd& cov, double tol = 1e-10);

double min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& symmetric);

}  // namespace geodep
