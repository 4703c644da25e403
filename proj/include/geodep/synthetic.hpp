#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "geodep/regression.hpp"

namespace geodep {

/// Points with (x - c) . (cos angle, sin angle) > offset belong to regime B,
/// where c is the grid centre.
struct HalfPlane {
  double angle = 0.0;
  double offset = 0.0;
};

/// Points strictly inside the disc belong to regime B. Centre is relative to
/// the grid centre.
struct Disc {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 1.0;
};

using RegimeGeometry = std::variant<HalfPlane, Disc>;

enum class Generator { StationaryGp, TwoRegime };

struct FieldSpec {
  int nx = 30;
  int ny = 30;
  double spacing = 1.0;
  Generator generator = Generator::StationaryGp;
  /// Field kernel, or the within-regime kernel for two-regime fields.
  KernelParams kernel{1.0, 3.0, 0.01};
  RegimeGeometry geometry = HalfPlane{};
  /// Level difference between regime B and regime A.
  double gap = 10.0;
  std::uint64_t seed = 42;

  void validate() const;
  /// Row-major lattice: point k = (ix * spacing, iy * spacing), k = iy * nx + ix.
  MatrixXd grid() const;
};

/// One draw z = L eps with L L^T the RBF Gram plus noise diagonal.
SampleSet sample_stationary_field(const FieldSpec& spec);

struct RegimeField {
  SampleSet field;
  /// 0 for regime A, 1 for regime B, per grid point.
  std::vector<int> labels;
};

/// Regime level (0 or gap) plus a within-regime stationary draw.
RegimeField sample_two_regime_field(const FieldSpec& spec);

struct Subsample {
  SampleSet samples;
  std::vector<Index> indices;
};

/// Uniform sampling without replacement; indices are in draw order.
Subsample random_subsample(const SampleSet& field, Index n, std::uint64_t seed);

/// Standard desk-scale fixtures shared by the tests, the acceptance suite and the CLI.
namespace fixtures {

/// Two regimes split by the vertical centre line of a 30 x 30 grid; gap = 10 x within-regime sd.
FieldSpec two_regime_spec(std::uint64_t seed = 7);
/// Stationary RBF field on a 30 x 30 grid.
FieldSpec stationary_spec(std::uint64_t seed = 7);

struct LabelledSample {
  SampleSet samples;
  std::vector<int> labels;
};

LabelledSample two_regime_sample(std::uint64_t seed = 7, Index n = 20);
LabelledSample stationary_sample(std::uint64_t seed = 7, Index n = 20);

}  // namespace fixtures

}  // namespace geodep
