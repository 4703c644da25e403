#include "geodep/optimize.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

namespace geodep {
namespace {

// Values GSL can still compare against; the optimizers treat them as rejections.
constexpr double kRejected = 1e300;

struct GslErrorsOff {
  GslErrorsOff() { gsl_set_error_handler_off(); }
};
const GslErrorsOff gsl_errors_off;

Eigen::Map<const Eigen::VectorXd> view(const gsl_vector* v) {
  return {v->data, static_cast<Eigen::Index>(v->size)};
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using GslVector = std::unique_ptr<gsl_vector, VectorDeleter>;

GslVector to_gsl(const Eigen::VectorXd& x) {
  GslVector v(gsl_vector_alloc(static_cast<size_t>(x.size())));
  for (Eigen::Index i = 0; i < x.size(); ++i) gsl_vector_set(v.get(), static_cast<size_t>(i), x(i));
  return v;
}

Eigen::VectorXd from_gsl(const gsl_vector* v) { return view(v); }

double guarded(double value) { return std::isfinite(value) ? value : kRejected; }

double simplex_eval(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const Objective*>(params);
  return guarded(f(from_gsl(x)));
}

double fdf_f(const gsl_vector* x, void* params) {
  const auto& f = *static_cast<const ObjectiveWithGradient*>(params);
  return guarded(f(from_gsl(x), nullptr));
}

void fdf_df(const gsl_vector* x, void* params, gsl_vector* g) {
  const auto& f = *static_cast<const ObjectiveWithGradient*>(params);
  Eigen::VectorXd grad(static_cast<Eigen::Index>(x->size));
  f(from_gsl(x), &grad);
  for (size_t i = 0; i < g->size; ++i) {
    const double gi = grad(static_cast<Eigen::Index>(i));
    gsl_vector_set(g, i, std::isfinite(gi) ? gi : 0.0);
  }
}

void fdf_fdf(const gsl_vector* x, void* params, double* value, gsl_vector* g) {
  const auto& f = *static_cast<const ObjectiveWithGradient*>(params);
  Eigen::VectorXd grad(static_cast<Eigen::Index>(x->size));
  *value = guarded(f(from_gsl(x), &grad));
  for (size_t i = 0; i < g->size; ++i) {
    const double gi = grad(static_cast<Eigen::Index>(i));
    gsl_vector_set(g, i, std::isfinite(gi) ? gi : 0.0);
  }
}

}  // namespace

OptimizeResult minimize_simplex(const Objective& f, const Eigen::VectorXd& x0, const SimplexOptions& options) {
  OptimizeResult result;
  result.x = x0;
  result.value = guarded(f(x0));
  if (x0.size() == 0) {
    result.converged = true;
    return result;
  }

  gsl_multimin_function fn{&simplex_eval, static_cast<size_t>(x0.size()), const_cast<Objective*>(&f)};
  GslVector start = to_gsl(x0);
  GslVector step = to_gsl(options.initial_step.size() == x0.size()
                              ? options.initial_step
                              : Eigen::VectorXd::Constant(x0.size(), 0.1));

  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, static_cast<size_t>(x0.size())),
      &gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(s.get(), &fn, start.get(), step.get());

  // fval is only populated by the first iterate, so seed the best point with x0.
  double best = result.value;
  Eigen::VectorXd best_x = x0;
  result.trace.push_back(best);
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    result.iterations = iter;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
    const double value = gsl_multimin_fminimizer_minimum(s.get());
    if (value <= best) {
      best = value;
      best_x = from_gsl(gsl_multimin_fminimizer_x(s.get()));
    }
    result.trace.push_back(best);
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), options.size_tol) == GSL_SUCCESS) {
      result.converged = true;
      break;
    }
  }
  if (best <= result.value) {
    result.x = best_x;
    result.value = best;
  }
  return result;
}

OptimizeResult minimize_bfgs(const ObjectiveWithGradient& f, const Eigen::VectorXd& x0,
                             const GradientOptions& options) {
  OptimizeResult result;
  result.x = x0;
  Eigen::VectorXd grad(x0.size());
  result.value = guarded(f(x0, &grad));
  result.trace.push_back(result.value);
  if (x0.size() == 0 || grad.norm() < options.grad_tol) {
    result.converged = true;
    return result;
  }

  gsl_multimin_function_fdf fn{&fdf_f, &fdf_df, &fdf_fdf, static_cast<size_t>(x0.size()),
                               const_cast<ObjectiveWithGradient*>(&f)};
  GslVector start = to_gsl(x0);
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, static_cast<size_t>(x0.size())),
      &gsl_multimin_fdfminimizer_free);
  gsl_multimin_fdfminimizer_set(s.get(), &fn, start.get(), options.initial_step, options.line_tol);

  double best = result.value;
  Eigen::VectorXd best_x = x0;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    result.iterations = iter;
    const int status = gsl_multimin_fdfminimizer_iterate(s.get());
    const double value = s->f;
    const bool improved = value < best;
    if (improved) {
      const double change = (best - value) / std::max(1.0, std::abs(best));
      best = value;
      best_x = from_gsl(s->x);
      if (change < options.rel_tol) result.converged = true;
    }
    result.trace.push_back(best);
    if (status != GSL_SUCCESS) {
      // No further progress possible along the search direction: a local stop.
      result.converged = result.converged || status == GSL_ENOPROG;
      break;
    }
    if (gsl_multimin_test_gradient(s->gradient, options.grad_tol) == GSL_SUCCESS) {
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }
  result.x = best_x;
  result.value = best;
  return result;
}

}  // namespace geodep
