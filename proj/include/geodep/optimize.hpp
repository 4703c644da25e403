#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace geodep {

struct OptimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Best objective value after each iteration; non-increasing.
  std::vector<double> trace;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
/// Returns f(x) and, when `grad` is non-null, writes the gradient into it.
using ObjectiveWithGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd* grad)>;

struct SimplexOptions {
  int max_iters = 2000;
  /// Stop once the characteristic simplex size drops below this.
  double size_tol = 1e-10;
  /// Initial step per coordinate; empty means 0.1 for every coordinate.
  Eigen::VectorXd initial_step;
};

/// Nelder-Mead simplex (GSL nmsimplex2).
OptimizeResult minimize_simplex(const Objective& f, const Eigen::VectorXd& x0, const SimplexOptions& options = {});

struct GradientOptions {
  int max_iters = 500;
  /// Stop when the gradient norm falls below this.
  double grad_tol = 1e-8;
  /// Stop when an iteration improves f by less than this relative amount.
  double rel_tol = 1e-12;
  double initial_step = 0.01;
  double line_tol = 0.1;
};

/// Quasi-Newton descent with a Wolfe line search (GSL vector_bfgs2).
OptimizeResult minimize_bfgs(const ObjectiveWithGradient& f, const Eigen::VectorXd& x0,
                             const GradientOptions& options = {});

}  // namespace geodep
