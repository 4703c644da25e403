#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "geodep/errors.hpp"
#include "geodep/expansion.hpp"
#include "geodep/regression.hpp"
#include "geodep/synthetic.hpp"
#include "geodep/variogram.hpp"

namespace py = pybind11;
using namespace geodep;

namespace {

SampleSet make_samples(const MatrixXd& coords, const VectorXd& values) {
  return SampleSet::with_any_dimension(coords, MatrixXd(coords.rows(), 0), values);
}

VariogramFamily family_from(const std::string& name) { return parse_family(name); }

MeanFunction mean_from(const std::string& name) {
  if (name == "zero") return MeanFunction::Zero;
  if (name == "constant") return MeanFunction::Constant;
  throw ValidationError("mean must be 'zero' or 'constant'");
}

// (cloud rows h, v, i, j ; binned rows h_center, gamma, count)
py::tuple variogram(const MatrixXd& coords, const VectorXd& values, int n_bins, std::optional<double> h_max) {
  const VariogramCloud cloud = empirical_semivariance(coords, values);
  MatrixXd c(static_cast<Index>(cloud.size()), 4);
  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto& p = cloud.pairs[k];
    c.row(static_cast<Index>(k)) << p.h, p.v, static_cast<double>(p.i), static_cast<double>(p.j);
  }
  const BinnedVariogram b = bin_cloud(cloud, n_bins, h_max.value_or(cloud.max_distance()));
  MatrixXd out(static_cast<Index>(b.size()), 3);
  for (std::size_t k = 0; k < b.size(); ++k)
    out.row(static_cast<Index>(k)) << b.bins[k].h_center, b.bins[k].gamma_mean, static_cast<double>(b.bins[k].count);
  return py::make_tuple(c, out);
}

FitResult fit(const VectorXd& h_center, const VectorXd& gamma, const Eigen::VectorXi& count, double h_max,
              const std::string& family, bool fit_nugget) {
  if (gamma.size() != h_center.size() || count.size() != h_center.size())
    throw ValidationError("bin arrays differ in length");
  BinnedVariogram b;
  b.h_max = h_max;
  for (Index k = 0; k < h_center.size(); ++k) {
    if (count(k) < 1) throw ValidationError("bin counts must be positive");
    b.bins.push_back({h_center(k), gamma(k), static_cast<std::size_t>(count(k))});
  }
  FitOptions opts;
  opts.fit_nugget = fit_nugget;
  return fit_variogram_result(b, family_from(family), opts);
}

WeightPrior prior(const MatrixXd& sigma_p, double noise_var) { return {sigma_p, noise_var}; }

py::tuple predictive(const PredictiveDistribution& p) { return py::make_tuple(p.mean, p.cov); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Variograms, Gaussian-process regression and dimension expansion";

  static py::exception<Error> base(m, "GeodepError", PyExc_ValueError);
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  static py::exception<ValidationError> validation_error(m, "ValidationError", base.ptr());
  static py::exception<ConditioningError> conditioning_error(m, "ConditioningError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const ConditioningError& e) {
      py::set_error(conditioning_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<VariogramModel>(m, "VariogramModel")
      .def(py::init([](const std::string& family, double sill, double range, double nugget) {
             VariogramModel v{family_from(family), sill, range, nugget};
             v.validate();
             return v;
           }),
           py::arg("family") = "gaussian", py::arg("sill") = 1.0, py::arg("range") = 1.0, py::arg("nugget") = 0.0)
      .def_property_readonly("family", [](const VariogramModel& v) { return std::string(to_string(v.family)); })
      .def_readonly("sill", &VariogramModel::sill)
      .def_readonly("range", &VariogramModel::range)
      .def_readonly("nugget", &VariogramModel::nugget)
      .def("__call__", [](const VariogramModel& v, double h) { return v(h); })
      .def("covariance", [](const VariogramModel& v, double h) { return model_to_covariance(v, h); })
      .def("__repr__", [](const VariogramModel& v) {
        return "VariogramModel(" + std::string(to_string(v.family)) + ", sill=" + std::to_string(v.sill) +
               ", range=" + std::to_string(v.range) + ", nugget=" + std::to_string(v.nugget) + ")";
      });

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("loss", &FitResult::loss)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("flat_cloud", &FitResult::flat_cloud)
      .def_readonly("iterations", &FitResult::iterations);

  m.def("variogram", &variogram, py::arg("coords"), py::arg("values"), py::arg("n_bins") = 10,
        py::arg("h_max") = py::none(),
        "Semivariance cloud (rows h, v, i, j) and equal-width bins (rows h_center, gamma, count).");
  m.def("fit_variogram", &fit, py::arg("h_center"), py::arg("gamma"), py::arg("count"), py::arg("h_max"),
        py::arg("family") = "gaussian", py::arg("fit_nugget") = false);
  m.def("morans_i", [](const MatrixXd& coords, const VectorXd& values) { return morans_i(make_samples(coords, values)); },
        py::arg("coords"), py::arg("values"));

  m.def(
      "weight_space_predict",
      [](const MatrixXd& x, const VectorXd& z, const MatrixXd& xs, int degree, const MatrixXd& sigma_p,
         double noise_var) {
        return predictive(weight_space_predict(x, z, xs, BasisSpec::polynomial(degree), prior(sigma_p, noise_var)));
      },
      py::arg("train_x"), py::arg("train_z"), py::arg("test_x"), py::arg("degree"), py::arg("sigma_p"),
      py::arg("noise_var"), "Posterior (mean, cov) under a polynomial basis with a Gaussian weight prior.");
  m.def(
      "gp_predict",
      [](const MatrixXd& x, const VectorXd& z, const MatrixXd& xs, double signal_var, double length_scale,
         double noise_var, const std::string& mean) {
        return predictive(gp_predict(x, z, xs, KernelParams{signal_var, length_scale, noise_var}, mean_from(mean)));
      },
      py::arg("train_x"), py::arg("train_z"), py::arg("test_x"), py::arg("signal_var") = 1.0,
      py::arg("length_scale") = 1.0, py::arg("noise_var") = 0.0, py::arg("mean") = "zero");
  m.def(
      "equivalence_check",
      [](const MatrixXd& x, const VectorXd& z, const MatrixXd& xs, int degree, const MatrixXd& sigma_p,
         double noise_var) {
        const EquivalenceReport r =
            equivalence_check(x, z, xs, BasisSpec::polynomial(degree), prior(sigma_p, noise_var));
        return py::make_tuple(r.mean_discrepancy, r.cov_discrepancy);
      },
      py::arg("train_x"), py::arg("train_z"), py::arg("test_x"), py::arg("degree"), py::arg("sigma_p"),
      py::arg("noise_var"), "(mean discrepancy, covariance discrepancy) between the two predictive routes.");
  m.def(
      "equivalence_sweep",
      [](int trials, int n, int m_max, std::uint64_t seed) {
        return equivalence_sweep(trials, n, m_max, seed).max_discrepancy();
      },
      py::arg("trials") = 100, py::arg("n") = 20, py::arg("m") = 5, py::arg("seed") = 42);
  m.def(
      "log_marginal_likelihood",
      [](const MatrixXd& x, const VectorXd& z, double signal_var, double length_scale, double noise_var) {
        const MarginalLikelihood ml = log_marginal_likelihood(x, z, KernelParams{signal_var, length_scale, noise_var});
        return py::make_tuple(ml.value, VectorXd(ml.gradient));
      },
      py::arg("train_x"), py::arg("train_z"), py::arg("signal_var"), py::arg("length_scale"), py::arg("noise_var"),
      "Log marginal likelihood and its gradient in (log signal_var, log length_scale, log noise_var).");

  py::class_<Expansion>(m, "Expansion")
      .def_readonly("z_prime", &Expansion::z_prime)
      .def_readonly("phi_hat", &Expansion::phi_hat)
      .def_readonly("converged", &Expansion::converged)
      .def_readonly("lambda_", &Expansion::lambda)
      .def_property_readonly("trace", [](const Expansion& e) {
        std::vector<double> t;
        for (const auto& p : e.trace) t.push_back(p.objective);
        return t;
      });

  m.def(
      "learn_expansion",
      [](const MatrixXd& coords, const VectorXd& values, int p, std::optional<double> lambda, std::uint64_t seed,
         int max_iters, const std::string& optimizer) {
        ExpansionConfig cfg;
        cfg.p = p;
        cfg.lambda = lambda;
        cfg.seed = seed;
        cfg.max_iters = max_iters;
        if (optimizer == "gradient")
          cfg.optimizer = LatentOptimizer::Gradient;
        else if (optimizer == "simplex")
          cfg.optimizer = LatentOptimizer::Simplex;
        else
          throw ValidationError("optimizer must be 'gradient' or 'simplex'");
        return learn_expansion(make_samples(coords, values), cfg);
      },
      py::arg("coords"), py::arg("values"), py::arg("p") = 1, py::arg("lambda_") = py::none(), py::arg("seed") = 42,
      py::arg("max_iters") = 100, py::arg("optimizer") = "gradient");
  m.def(
      "stationarity_report",
      [](const MatrixXd& coords, const VectorXd& values, const Expansion& e) {
        const StationarityReport r = stationarity_report(make_samples(coords, values), e);
        py::dict d;
        d["geographic_residual"] = r.geographic_residual;
        d["expanded_residual"] = r.expanded_residual;
        d["improvement_ratio"] = r.improvement_ratio;
        d["min_covariance_eigenvalue"] = r.min_covariance_eigenvalue;
        d["psd_witness"] = r.psd_witness;
        return d;
      },
      py::arg("coords"), py::arg("values"), py::arg("expansion"));
  m.def(
      "interpolate_latent",
      [](const MatrixXd& coords, const VectorXd& values, const Expansion& e, const MatrixXd& grid) {
        return interpolate_latent(make_samples(coords, values), e, grid);
      },
      py::arg("coords"), py::arg("values"), py::arg("expansion"), py::arg("grid"));

  m.def(
      "two_regime_sample",
      [](std::uint64_t seed, Index n) {
        fixtures::LabelledSample s = fixtures::two_regime_sample(seed, n);
        return py::make_tuple(s.samples.coords(), s.samples.values(), s.labels);
      },
      py::arg("seed") = 7, py::arg("n") = 20, "(coords, values, labels) of the two-regime fixture.");
  m.def(
      "stationary_sample",
      [](std::uint64_t seed, Index n) {
        fixtures::LabelledSample s = fixtures::stationary_sample(seed, n);
        return py::make_tuple(s.samples.coords(), s.samples.values());
      },
      py::arg("seed") = 7, py::arg("n") = 20);
}
