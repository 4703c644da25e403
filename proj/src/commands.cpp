#include "geodep/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "geodep/csv_io.hpp"
#include "geodep/errors.hpp"
#include "geodep/svg.hpp"
#include "geodep/synthetic.hpp"

namespace geodep::cli {
namespace fs = std::filesystem;

namespace {

fs::path prepare_dir(const std::string& out) {
  if (out.empty()) throw ValidationError("an output directory (--out) is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ValidationError("cannot create output directory '" + out + "'");
  return fs::path(out);
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  return f;
}

// Key=value report line.
class Report {
 public:
  void add(const std::string& key, const std::string& value) { text_ << key << '=' << value << '\n'; }
  void add(const std::string& key, double value) { add(key, format_number(value)); }
  void add(const std::string& key, long long value) { add(key, std::to_string(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, const char* value) { add(key, std::string(value)); }

  std::string str() const { return text_.str(); }
  void save(const fs::path& path) const { open_file(path) << text_.str(); }

 private:
  std::ostringstream text_;
};

VectorXd column(const std::vector<CloudPair>& pairs, double CloudPair::*member) {
  VectorXd v(static_cast<Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) v(static_cast<Index>(k)) = pairs[k].*member;
  return v;
}

void binned_columns(const BinnedVariogram& b, VectorXd& h, VectorXd& g) {
  h.resize(static_cast<Index>(b.size()));
  g.resize(static_cast<Index>(b.size()));
  for (std::size_t k = 0; k < b.size(); ++k) {
    h(static_cast<Index>(k)) = b.bins[k].h_center;
    g(static_cast<Index>(k)) = b.bins[k].gamma_mean;
  }
}

void add_model_curve(SvgPlot& plot, const VariogramModel& model, double h_max, const std::string& color) {
  constexpr Index kPoints = 200;
  VectorXd h = VectorXd::LinSpaced(kPoints, 0.0, h_max);
  VectorXd g(kPoints);
  // The curve starts just right of zero so a nugget shows as a jump.
  for (Index k = 0; k < kPoints; ++k) g(k) = model(k == 0 ? 0.0 : h(k));
  plot.line(h, g, color);
}

struct Cloud {
  VariogramCloud cloud;
  BinnedVariogram binned;
};

Cloud cloud_and_bins(const SampleSet& samples, int n_bins, std::optional<double> h_max) {
  if (samples.size() < 2) throw ValidationError("a variogram needs at least 2 samples");
  Cloud c;
  c.cloud = empirical_semivariance(samples);
  double limit = h_max ? *h_max : c.cloud.max_distance();
  if (!h_max && !(limit > 0.0)) limit = 1.0;
  c.binned = bin_cloud(c.cloud, n_bins, limit);
  return c;
}

double population_variance(const VectorXd& v) { return (v.array() - v.mean()).square().mean(); }

std::string family_name(VariogramFamily f) { return std::string(to_string(f)); }

}  // namespace

int run_variogram(const VariogramArgs& args, std::ostream& log) {
  const SampleSet samples = read_samples_file(args.input).samples;
  const fs::path dir = prepare_dir(args.out);
  const Cloud c = cloud_and_bins(samples, args.n_bins, args.h_max);

  {
    std::ofstream f = open_file(dir / "cloud.csv");
    CsvWriter w(f, {"h", "v", "i", "j"});
    for (const auto& p : c.cloud.pairs)
      w.row({p.h, p.v, static_cast<std::int64_t>(p.i), static_cast<std::int64_t>(p.j)});
  }
  {
    std::ofstream f = open_file(dir / "binned.csv");
    CsvWriter w(f, {"h_center", "gamma", "count"});
    for (const auto& b : c.binned.bins) w.row({b.h_center, b.gamma_mean, static_cast<std::int64_t>(b.count)});
  }

  SvgPlot plot("Semivariance cloud", "distance h", "semivariance");
  const VectorXd h = column(c.cloud.pairs, &CloudPair::h);
  const VectorXd v = column(c.cloud.pairs, &CloudPair::v);
  plot.set_range(0.0, std::max(c.binned.h_max, h.maxCoeff()), 0.0, v.maxCoeff());
  plot.scatter(h, v, "#4477aa");
  VectorXd bh, bg;
  binned_columns(c.binned, bh, bg);
  plot.line(bh, bg, "#cc3311");
  plot.scatter(bh, bg, "#cc3311", 5.0);
  plot.save(dir / "variogram.svg");

  Report summary;
  summary.add("samples", static_cast<long long>(samples.size()));
  summary.add("pairs", static_cast<long long>(c.cloud.size()));
  summary.add("bins", static_cast<long long>(c.binned.size()));
  summary.add("h_max", c.binned.h_max);
  try {
    summary.add("morans_i", morans_i(samples));
  } catch (const ValidationError&) {
    summary.add("morans_i", "undefined");
  }
  summary.save(dir / "summary.txt");
  log << "variogram: " << c.cloud.size() << " pairs in " << c.binned.size() << " bins -> " << dir.string() << '\n';
  return 0;
}

int run_fit(const FitArgs& args, std::ostream& log) {
  const SampleSet samples = read_samples_file(args.input).samples;
  const fs::path dir = prepare_dir(args.out);
  const Cloud c = cloud_and_bins(samples, args.n_bins, args.h_max);
  FitOptions opts;
  opts.fit_nugget = args.nugget;
  const FitResult fit = fit_variogram_result(c.binned, args.family, opts);

  Report r;
  r.add("family", family_name(fit.model.family));
  r.add("sill", fit.model.sill);
  r.add("range", fit.model.range);
  r.add("nugget", fit.model.nugget);
  r.add("loss", fit.loss);
  r.add("iterations", static_cast<long long>(fit.iterations));
  r.add("converged", fit.converged);
  if (fit.flat_cloud) r.add("warning", "flat_cloud");
  r.save(dir / "fit.txt");

  SvgPlot plot("Fitted " + family_name(fit.model.family) + " variogram", "distance h", "semivariance");
  VectorXd bh, bg;
  binned_columns(c.binned, bh, bg);
  const double top = std::max(bg.maxCoeff(), fit.model.sill + fit.model.nugget);
  plot.set_range(0.0, c.binned.h_max, 0.0, top);
  plot.scatter(bh, bg, "#cc3311", 5.0);
  add_model_curve(plot, fit.model, c.binned.h_max, "#222222");
  plot.save(dir / "fit.svg");

  log << "fit: " << family_name(fit.model.family) << " sill=" << format_number(fit.model.sill)
      << " range=" << format_number(fit.model.range) << " loss=" << format_number(fit.loss)
      << (fit.converged ? "" : " (not converged)") << '\n';
  return fit.converged ? 0 : static_cast<int>(ErrorKind::NonConvergence);
}

GridSpec GridSpec::parse(const std::string& text) {
  GridSpec g;
  const auto axes = split_csv_line(text);
  auto bad = [&] { return ValidationError("grid spec must look like xmin:xmax:nx,ymin:ymax:ny, got '" + text + "'"); };
  if (axes.size() != 2) throw bad();
  auto axis = [&](const std::string& s, double& lo, double& hi, int& count) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t colon; (colon = s.find(':', start)) != std::string::npos; start = colon + 1)
      parts.push_back(s.substr(start, colon - start));
    parts.push_back(s.substr(start));
    if (parts.size() != 3) throw bad();
    try {
      lo = parse_number(parts[0], 0);
      hi = parse_number(parts[1], 0);
      const double c = parse_number(parts[2], 0);
      if (c != std::floor(c) || c < 2 || c > 1e6) throw bad();
      count = static_cast<int>(c);
    } catch (const ParseError&) {
      throw bad();
    }
    if (!(hi > lo)) throw bad();
  };
  axis(axes[0], g.x0, g.x1, g.nx);
  axis(axes[1], g.y0, g.y1, g.ny);
  return g;
}

VectorXd GridSpec::xs() const { return VectorXd::LinSpaced(nx, x0, x1); }
VectorXd GridSpec::ys() const { return VectorXd::LinSpaced(ny, y0, y1); }

MatrixXd GridSpec::points() const {
  const VectorXd x = xs(), y = ys();
  MatrixXd pts(static_cast<Index>(nx) * ny, 2);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) pts(static_cast<Index>(iy) * nx + ix, 0) = x(ix), pts(static_cast<Index>(iy) * nx + ix, 1) = y(iy);
  return pts;
}

namespace {

// Test points from a CSV with the training file's coordinate and covariate
// columns (matched by name); any other column, such as z, is ignored.
MatrixXd read_test_points(const std::string& path, const SampleTable& train) {
  const NumericTable t = read_numeric_csv_file(path);
  std::vector<std::string> wanted{"lon", "lat"};
  if (train.samples.spatial_dims() == 3) wanted.emplace_back("alt");
  for (const auto& name : train.covariate_names) wanted.push_back("x_" + name);
  MatrixXd pts(t.rows.rows(), static_cast<Index>(wanted.size()));
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    const auto it = std::find(t.header.begin(), t.header.end(), wanted[k]);
    if (it == t.header.end()) throw ParseError(1, "test file lacks column '" + wanted[k] + "'");
    pts.col(static_cast<Index>(k)) = t.rows.col(static_cast<Index>(it - t.header.begin()));
  }
  if (pts.rows() == 0) throw ValidationError("test file contains no points");
  return pts;
}

}  // namespace

int run_krige(const KrigeArgs& args, std::ostream& log) {
  const SampleTable train = read_samples_file(args.input);
  if (args.test.has_value() == args.grid.has_value())
    throw ValidationError("krige needs exactly one of --test or --predict-grid");
  const fs::path dir = prepare_dir(args.out);
  const MatrixXd x = train.samples.predictors();
  const VectorXd& z = train.samples.values();

  MatrixXd test;
  if (args.grid) {
    if (x.cols() != 2) throw ValidationError("grid prediction needs lon,lat training data without covariates");
    test = args.grid->points();
  } else {
    test = read_test_points(*args.test, train);
  }

  const double var = population_variance(z);
  const double span = pairwise_distances(x).max();
  KernelParams params;
  params.signal_var = args.signal_var.value_or(var > 0.0 ? var : 1.0);
  params.length_scale = args.length_scale.value_or(span > 0.0 ? 0.2 * span : 1.0);
  params.noise_var = args.noise_var.value_or(0.0);
  params.validate();
  bool converged = true;
  if (args.optimize) {
    HyperparamOptions opts;
    opts.mean_fn = args.mean;
    opts.fit_noise = !args.noise_var.has_value();
    const HyperparamFit fit = optimize_hyperparams(x, z, params, opts);
    params = fit.params;
    converged = fit.converged;
  }
  const PredictiveDistribution pred = gp_predict(x, z, test, params, args.mean);
  const VectorXd sd = pred.sd();

  {
    std::ofstream f = open_file(dir / "predictions.csv");
    if (args.grid) {
      CsvWriter w(f, {"ix", "iy", "lon", "lat", "mean", "sd"});
      for (Index k = 0; k < test.rows(); ++k)
        w.row({static_cast<std::int64_t>(k % args.grid->nx), static_cast<std::int64_t>(k / args.grid->nx), test(k, 0),
               test(k, 1), pred.mean(k), sd(k)});
    } else {
      std::vector<std::string> header{"point", "lon", "lat"};
      if (train.samples.spatial_dims() == 3) header.emplace_back("alt");
      for (const auto& name : train.covariate_names) header.push_back("x_" + name);
      header.emplace_back("mean");
      header.emplace_back("sd");
      CsvWriter w(f, header);
      for (Index k = 0; k < test.rows(); ++k) {
        std::vector<Cell> cells{static_cast<std::int64_t>(k)};
        for (Index c = 0; c < test.cols(); ++c) cells.emplace_back(test(k, c));
        cells.emplace_back(pred.mean(k));
        cells.emplace_back(sd(k));
        w.row(cells);
      }
    }
  }

  Report r;
  r.add("signal_var", params.signal_var);
  r.add("length_scale", params.length_scale);
  r.add("noise_var", params.noise_var);
  r.add("mean_function", args.mean == MeanFunction::Zero ? "zero" : "constant");
  r.add("optimized", args.optimize);
  r.add("converged", converged);
  r.save(dir / "kernel.txt");

  SvgPlot plot("Kriging mean", "lon", "lat");
  if (args.grid) {
    const GridSpec& g = *args.grid;
    const MatrixXd raster = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        pred.mean.data(), g.ny, g.nx);
    const double hx = 0.5 * (g.x1 - g.x0) / (g.nx - 1), hy = 0.5 * (g.y1 - g.y0) / (g.ny - 1);
    plot.set_range(g.x0 - hx, g.x1 + hx, g.y0 - hy, g.y1 + hy);
    plot.heatmap(g.xs(), g.ys(), raster);
    plot.scatter(x.col(0), x.col(1), "#ffffff", 3.0);
  } else {
    const double lo_x = std::min(test.col(0).minCoeff(), x.col(0).minCoeff());
    const double hi_x = std::max(test.col(0).maxCoeff(), x.col(0).maxCoeff());
    const double lo_y = std::min(test.col(1).minCoeff(), x.col(1).minCoeff());
    const double hi_y = std::max(test.col(1).maxCoeff(), x.col(1).maxCoeff());
    plot.set_range(lo_x, hi_x, lo_y, hi_y);
    plot.value_points(test.col(0), test.col(1), pred.mean);
    plot.scatter(x.col(0), x.col(1), "#222222", 2.0);
  }
  plot.save(dir / "krige.svg");

  log << "krige: " << test.rows() << " predictions -> " << dir.string() << '\n';
  return 0;
}

int run_equiv(const EquivArgs& args, std::ostream& log) {
  const EquivalenceSweep sweep = equivalence_sweep(args.trials, args.n, args.m, args.seed);
  const bool ok = sweep.max_discrepancy() <= kEquivalenceThreshold;
  Report r;
  r.add("trials", static_cast<long long>(sweep.trials));
  r.add("n_max", static_cast<long long>(args.n));
  r.add("m_max", static_cast<long long>(args.m));
  r.add("seed", std::to_string(args.seed));
  r.add("max_mean_discrepancy", sweep.max_mean_discrepancy);
  r.add("max_cov_discrepancy", sweep.max_cov_discrepancy);
  r.add("max_discrepancy", sweep.max_discrepancy());
  r.add("threshold", kEquivalenceThreshold);
  r.add("equivalent", ok);
  log << r.str();
  if (args.out) r.save(prepare_dir(*args.out) / "equiv.txt");
  return ok ? 0 : static_cast<int>(ErrorKind::EquivalenceBreach);
}

int run_expand(const ExpandArgs& args, std::ostream& log) {
  if (args.grid_size < 2) throw ValidationError("latent map grid needs at least 2 points per axis");
  const SampleTable table = read_samples_file(args.input);
  const SampleSet& samples = table.samples;
  const fs::path dir = prepare_dir(args.out);
  const Expansion e = learn_expansion(samples, args.config);
  const StationarityReport rep = stationarity_report(samples, e, args.config.n_bins);
  const Index p = e.z_prime.cols();

  {
    std::ofstream f = open_file(dir / "zprime.csv");
    std::vector<std::string> header{"index", "lon", "lat"};
    if (samples.spatial_dims() == 3) header.emplace_back("alt");
    for (Index c = 0; c < p; ++c) header.push_back("latent_" + std::to_string(c + 1));
    CsvWriter w(f, header);
    for (Index i = 0; i < samples.size(); ++i) {
      std::vector<Cell> cells{static_cast<std::int64_t>(i)};
      for (Index c = 0; c < samples.spatial_dims(); ++c) cells.emplace_back(samples.coords()(i, c));
      for (Index c = 0; c < p; ++c) cells.emplace_back(e.z_prime(i, c));
      w.row(cells);
    }
  }
  {
    std::ofstream f = open_file(dir / "phi.csv");
    CsvWriter w(f, {"sill", "range", "nugget", "lambda"});
    w.row({e.phi_hat.sill, e.phi_hat.range, e.phi_hat.nugget, e.lambda});
  }
  {
    std::ofstream f = open_file(dir / "trace.csv");
    CsvWriter w(f, {"iteration", "objective"});
    for (const auto& t : e.trace) w.row({static_cast<std::int64_t>(t.iteration), t.objective});
  }

  Report r;
  r.add("samples", static_cast<long long>(samples.size()));
  r.add("p", static_cast<long long>(p));
  r.add("lambda", e.lambda);
  r.add("objective", e.trace.back().objective);
  r.add("iterations", static_cast<long long>(e.trace.back().iteration));
  r.add("converged", e.converged);
  r.add("geographic_residual", rep.geographic_residual);
  r.add("expanded_residual", rep.expanded_residual);
  r.add("improvement_ratio", rep.improvement_ratio);
  r.add("min_covariance_eigenvalue", rep.min_covariance_eigenvalue);
  r.add("psd_witness", rep.psd_witness);
  r.add("frame_scale", e.frame.scale);
  r.save(dir / "report.txt");

  {
    // Distances are in frame units (predictors centred and divided by frame_scale).
    SvgPlot plot("Semivariance against expanded distance", "expanded distance (frame units)", "semivariance");
    const VectorXd gh = column(rep.geographic_cloud.pairs, &CloudPair::h);
    const VectorXd eh = column(rep.expanded_cloud.pairs, &CloudPair::h);
    const VectorXd v = column(rep.expanded_cloud.pairs, &CloudPair::v);
    const double h_max = std::max(gh.maxCoeff(), eh.maxCoeff());
    plot.set_range(0.0, h_max, 0.0, std::max(v.maxCoeff(), e.phi_hat.sill));
    plot.scatter(gh, v, "#bbbbbb", 2.0);
    plot.scatter(eh, v, "#4477aa");
    add_model_curve(plot, e.phi_hat, h_max, "#cc3311");
    plot.save(dir / "variogram_expanded.svg");
  }
  {
    const MatrixXd& coords = samples.coords();
    GridSpec g;
    g.x0 = coords.col(0).minCoeff();
    g.x1 = coords.col(0).maxCoeff();
    g.y0 = coords.col(1).minCoeff();
    g.y1 = coords.col(1).maxCoeff();
    if (!(g.x1 > g.x0)) g.x0 -= 0.5, g.x1 += 0.5;
    if (!(g.y1 > g.y0)) g.y0 -= 0.5, g.y1 += 0.5;
    g.nx = g.ny = args.grid_size;
    MatrixXd grid = g.points();
    if (samples.spatial_dims() == 3) {
      grid.conservativeResize(Eigen::NoChange, 3);
      grid.col(2).setConstant(coords.col(2).mean());
    }
    const MatrixXd latent = interpolate_latent(samples, e, grid);
    const VectorXd first = latent.col(0);
    const MatrixXd raster =
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(first.data(), g.ny, g.nx);
    SvgPlot plot("Interpolated latent dimension 1", "lon", "lat");
    plot.set_range(g.x0, g.x1, g.y0, g.y1);
    plot.heatmap(g.xs(), g.ys(), raster);
    plot.contours(g.xs(), g.ys(), raster, contour_levels(raster, 8), "#ffffff");
    plot.scatter(coords.col(0), coords.col(1), "#000000", 3.0);
    plot.save(dir / "latent_map.svg");
  }

  log << "expand: ratio=" << format_number(rep.improvement_ratio) << " psd_witness=" << (rep.psd_witness ? "true" : "false")
      << " converged=" << (e.converged ? "true" : "false") << " -> " << dir.string() << '\n';
  return 0;
}

int run_synth(const SynthArgs& args, std::ostream& log) {
  FieldSpec spec;
  const bool two_regime = args.generator == "two-regime";
  if (two_regime)
    spec = fixtures::two_regime_spec(args.seed);
  else if (args.generator == "stationary" || args.generator == "stationary-gp")
    spec = fixtures::stationary_spec(args.seed);
  else
    throw ValidationError("unknown generator '" + args.generator + "' (stationary | two-regime)");
  spec.nx = args.nx;
  spec.ny = args.ny;
  spec.spacing = args.spacing;
  if (args.signal_var) spec.kernel.signal_var = *args.signal_var;
  if (args.length_scale) spec.kernel.length_scale = *args.length_scale;
  if (args.noise_var) spec.kernel.noise_var = *args.noise_var;
  if (two_regime) {
    spec.gap = args.gap.value_or(10.0 * std::sqrt(spec.kernel.signal_var + spec.kernel.noise_var));
    if (args.geometry == "disc")
      spec.geometry = Disc{args.disc_cx, args.disc_cy, args.disc_radius};
    else if (args.geometry == "half-plane")
      spec.geometry = HalfPlane{args.angle, args.offset};
    else
      throw ValidationError("unknown geometry '" + args.geometry + "' (disc | half-plane)");
  }
  if (args.n_sample < 0 || args.n_sample > spec.nx * spec.ny)
    throw ValidationError("--n-sample must lie between 0 and the grid size");
  const fs::path dir = prepare_dir(args.out);

  std::vector<int> labels;
  const SampleSet field = two_regime ? [&] {
    RegimeField rf = sample_two_regime_field(spec);
    labels = std::move(rf.labels);
    return std::move(rf.field);
  }()
                                     : sample_stationary_field(spec);
  {
    std::ofstream f = open_file(dir / "field.csv");
    write_samples(f, field);
  }
  if (two_regime) {
    std::ofstream f = open_file(dir / "field_labels.csv");
    CsvWriter w(f, {"index", "label"});
    for (std::size_t k = 0; k < labels.size(); ++k)
      w.row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(labels[k])});
  }
  if (args.n_sample > 0) {
    const Subsample sub = random_subsample(field, args.n_sample, args.seed);
    {
      std::ofstream f = open_file(dir / "sample.csv");
      write_samples(f, sub.samples);
    }
    if (two_regime) {
      std::ofstream f = open_file(dir / "labels.csv");
      CsvWriter w(f, {"index", "grid_index", "label"});
      for (std::size_t k = 0; k < sub.indices.size(); ++k) {
        const Index g = sub.indices[k];
        w.row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(g),
               static_cast<std::int64_t>(labels[static_cast<std::size_t>(g)])});
      }
    }
  }
  log << "synth: " << args.generator << " field " << spec.nx << "x" << spec.ny;
  if (args.n_sample > 0) log << ", " << args.n_sample << " samples";
  log << " -> " << dir.string() << '\n';
  return 0;
}

int run_repro(const ReproArgs& args, std::ostream& log) {
  const fs::path dir = prepare_dir(args.out);
  SynthArgs synth;
  synth.out = (dir / "synth").string();
  synth.generator = "two-regime";
  synth.seed = args.seed;
  run_synth(synth, log);
  const std::string sample = (dir / "synth" / "sample.csv").string();

  VariogramArgs vario;
  vario.input = sample;
  vario.out = (dir / "variogram").string();
  run_variogram(vario, log);

  FitArgs fit;
  fit.input = sample;
  fit.out = (dir / "fit").string();
  const int fit_code = run_fit(fit, log);

  ExpandArgs expand;
  expand.input = sample;
  expand.out = (dir / "expand").string();
  expand.config.seed = args.seed;
  run_expand(expand, log);
  return fit_code;
}

}  // namespace geodep::cli
