#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "geodep/expansion.hpp"
#include "geodep/regression.hpp"
#include "geodep/variogram.hpp"

namespace geodep::cli {

/// Each command writes its files under `out` (created if missing) and returns
/// the process exit code. Hard failures are thrown as geodep::Error.

struct VariogramArgs {
  std::string input;
  std::string out;
  int n_bins = 10;
  std::optional<double> h_max;
};
int run_variogram(const VariogramArgs& args, std::ostream& log);

struct FitArgs {
  std::string input;
  std::string out;
  int n_bins = 10;
  std::optional<double> h_max;
  VariogramFamily family = VariogramFamily::Gaussian;
  bool nugget = false;
};
/// Returns 4 when the fit did not converge; the best parameters are still written.
int run_fit(const FitArgs& args, std::ostream& log);

/// Raster spec "xmin:xmax:nx,ymin:ymax:ny".
struct GridSpec {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 2, ny = 2;

  static GridSpec parse(const std::string& text);
  VectorXd xs() const;
  VectorXd ys() const;
  /// Row-major points, iy outer.
  MatrixXd points() const;
};

struct KrigeArgs {
  std::string input;
  std::string out;
  std::optional<std::string> test;
  std::optional<GridSpec> grid;
  std::optional<double> signal_var;
  std::optional<double> length_scale;
  std::optional<double> noise_var;
  bool optimize = false;
  MeanFunction mean = MeanFunction::Constant;
};
int run_krige(const KrigeArgs& args, std::ostream& log);

struct EquivArgs {
  std::optional<std::string> out;
  int trials = 100;
  int n = 20;
  int m = 5;
  std::uint64_t seed = 42;
};
inline constexpr double kEquivalenceThreshold = 1e-8;
/// Returns 6 when the largest discrepancy exceeds kEquivalenceThreshold.
int run_equiv(const EquivArgs& args, std::ostream& log);

struct ExpandArgs {
  std::string input;
  std::string out;
  ExpansionConfig config;
  int grid_size = 40;
};
int run_expand(const ExpandArgs& args, std::ostream& log);

struct SynthArgs {
  std::string out;
  std::string generator = "stationary";
  int nx = 30;
  int ny = 30;
  double spacing = 1.0;
  std::optional<double> signal_var;
  std::optional<double> length_scale;
  std::optional<double> noise_var;
  /// Level gap; unset means 10 x within-regime sd.
  std::optional<double> gap;
  std::string geometry = "half-plane";
  double disc_radius = 10.0;
  double disc_cx = 0.0;
  double disc_cy = 0.0;
  double angle = 0.0;
  double offset = 0.0;
  int n_sample = 20;
  std::uint64_t seed = 42;
};
int run_synth(const SynthArgs& args, std::ostream& log);

struct ReproArgs {
  std::string out;
  std::uint64_t seed = 7;
};
int run_repro(const ReproArgs& args, std::ostream& log);

/// Full command line: parses, dispatches and maps errors to exit codes.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geodep::cli
