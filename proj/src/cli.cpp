#include <CLI11.hpp>

#include <ostream>

#include "geodep/commands.hpp"
#include "geodep/errors.hpp"

namespace geodep::cli {
namespace {

const std::map<std::string, VariogramFamily> kFamilies{{"gaussian", VariogramFamily::Gaussian},
                                                       {"exponential", VariogramFamily::Exponential}};
const std::map<std::string, MeanFunction> kMeans{{"zero", MeanFunction::Zero}, {"constant", MeanFunction::Constant}};
const std::map<std::string, LatentOptimizer> kOptimizers{{"gradient", LatentOptimizer::Gradient},
                                                         {"simplex", LatentOptimizer::Simplex}};

template <class T>
void optional_number(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geostatistics toolkit: variograms, kriging and dimension expansion"};
  app.name("geodep");
  app.set_config("--config", "", "key=value file; keys are <subcommand>.<flag>, command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.require_subcommand(1);

  std::string out_dir;
  std::uint64_t seed = 42;
  app.add_option("--out", out_dir, "output directory");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "random seed")->capture_default_str();

  VariogramArgs vario;
  auto* c_vario = app.add_subcommand("variogram", "semivariance cloud, bins and scatter plot");
  c_vario->add_option("input", vario.input, "sample CSV")->required();
  c_vario->add_option("--n-bins", vario.n_bins)->capture_default_str()->check(CLI::PositiveNumber);
  optional_number(c_vario, "--h-max", vario.h_max, "largest binned distance (default: largest pair distance)");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "least-squares variogram model fit");
  c_fit->add_option("input", fit.input, "sample CSV")->required();
  c_fit->add_option("--n-bins", fit.n_bins)->capture_default_str()->check(CLI::PositiveNumber);
  optional_number(c_fit, "--h-max", fit.h_max, "largest binned distance");
  std::string family = "gaussian";
  c_fit->add_option("--family", family)->capture_default_str()->check(CLI::IsMember(kFamilies, CLI::ignore_case));
  c_fit->add_flag("--nugget", fit.nugget, "also fit a nugget");

  KrigeArgs krige;
  std::string grid_text;
  auto* c_krige = app.add_subcommand("krige", "Gaussian-process (kriging) prediction");
  c_krige->add_option("input", krige.input, "training sample CSV")->required();
  c_krige->add_option_function<std::string>("--test", [&](const std::string& s) { krige.test = s; },
                                            "CSV of prediction points");
  c_krige->add_option("--predict-grid", grid_text, "xmin:xmax:nx,ymin:ymax:ny");
  optional_number(c_krige, "--signal-var", krige.signal_var, "signal variance (default: variance of z)");
  optional_number(c_krige, "--length-scale", krige.length_scale, "length scale (default: 0.2 x largest distance)");
  optional_number(c_krige, "--noise-var", krige.noise_var, "noise variance (default: 0, noise-free)");
  c_krige->add_flag("--optimize", krige.optimize, "maximise the marginal likelihood from the given kernel");
  std::string mean = "constant";
  c_krige->add_option("--mean", mean)->capture_default_str()->check(CLI::IsMember(kMeans, CLI::ignore_case));

  EquivArgs equiv;
  auto* c_equiv = app.add_subcommand("equiv", "weight-space vs function-space discrepancy sweep");
  c_equiv->add_option("--trials", equiv.trials)->capture_default_str();
  c_equiv->add_option("--n", equiv.n, "largest training size")->capture_default_str();
  c_equiv->add_option("--m", equiv.m, "largest basis size")->capture_default_str();

  ExpandArgs expand;
  double lambda = 0.0;
  auto* c_expand = app.add_subcommand("expand", "learn latent dimensions that make the variogram stationary");
  c_expand->add_option("input", expand.input, "sample CSV")->required();
  c_expand->add_option("--p", expand.config.p, "number of latent dimensions")->capture_default_str();
  CLI::Option* lambda_opt = c_expand->add_option("--lambda", lambda, "ridge weight on Z'");
  c_expand->add_option("--max-iters", expand.config.max_iters)->capture_default_str();
  c_expand->add_option("--tolerance", expand.config.tolerance)->capture_default_str();
  c_expand->add_option("--n-bins", expand.config.n_bins)->capture_default_str();
  std::string optimizer = "gradient";
  c_expand->add_option("--optimizer", optimizer)
      ->capture_default_str()
      ->check(CLI::IsMember(kOptimizers, CLI::ignore_case));
  c_expand->add_option("--grid-size", expand.grid_size, "latent map resolution")->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "synthetic stationary or two-regime fields");
  c_synth->add_option("--generator", synth.generator, "stationary | two-regime")->capture_default_str();
  c_synth->add_option("--nx", synth.nx)->capture_default_str();
  c_synth->add_option("--ny", synth.ny)->capture_default_str();
  c_synth->add_option("--spacing", synth.spacing)->capture_default_str();
  optional_number(c_synth, "--signal-var", synth.signal_var, "field signal variance");
  optional_number(c_synth, "--length-scale", synth.length_scale, "field length scale");
  optional_number(c_synth, "--noise-var", synth.noise_var, "field noise variance");
  optional_number(c_synth, "--gap", synth.gap, "regime level gap (default: 10 x within-regime sd)");
  c_synth->add_option("--geometry", synth.geometry, "disc | half-plane")->capture_default_str();
  c_synth->add_option("--disc-radius", synth.disc_radius)->capture_default_str();
  c_synth->add_option("--disc-cx", synth.disc_cx, "disc centre offset from the grid centre")->capture_default_str();
  c_synth->add_option("--disc-cy", synth.disc_cy)->capture_default_str();
  c_synth->add_option("--angle", synth.angle, "half-plane normal angle (radians)")->capture_default_str();
  c_synth->add_option("--offset", synth.offset, "half-plane offset from the grid centre")->capture_default_str();
  c_synth->add_option("--n-sample", synth.n_sample, "random subsample size (0: none)")->capture_default_str();

  auto* c_repro = app.add_subcommand("repro-paper", "synth -> variogram -> fit -> expand on the two-regime fixture");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Parse);
  }

  try {
    const bool writes = !c_equiv->parsed();
    if (writes && out_dir.empty()) {
      err << "error: --out is required for this command\n";
      return static_cast<int>(ErrorKind::Parse);
    }
    if (c_vario->parsed()) {
      vario.out = out_dir;
      return run_variogram(vario, out);
    }
    if (c_fit->parsed()) {
      fit.out = out_dir;
      fit.family = kFamilies.at(CLI::detail::to_lower(family));
      return run_fit(fit, out);
    }
    if (c_krige->parsed()) {
      krige.out = out_dir;
      krige.mean = kMeans.at(CLI::detail::to_lower(mean));
      if (!grid_text.empty()) {
        try {
          krige.grid = GridSpec::parse(grid_text);
        } catch (const ValidationError& e) {
          err << "error: --predict-grid: " << e.what() << '\n';
          return static_cast<int>(ErrorKind::Parse);
        }
      }
      return run_krige(krige, out);
    }
    if (c_equiv->parsed()) {
      if (!out_dir.empty()) equiv.out = out_dir;
      equiv.seed = seed;
      return run_equiv(equiv, out);
    }
    if (c_expand->parsed()) {
      expand.out = out_dir;
      expand.config.optimizer = kOptimizers.at(CLI::detail::to_lower(optimizer));
      expand.config.seed = seed;
      if (lambda_opt->count() > 0) expand.config.lambda = lambda;
      return run_expand(expand, out);
    }
    if (c_synth->parsed()) {
      synth.out = out_dir;
      synth.seed = seed;
      return run_synth(synth, out);
    }
    if (c_repro->parsed()) {
      ReproArgs repro;
      repro.out = out_dir;
      if (seed_opt->count() > 0) repro.seed = seed;
      return run_repro(repro, out);
    }
  } catch (const FitNonConvergence& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return static_cast<int>(ErrorKind::Parse);
}

}  // namespace geodep::cli
