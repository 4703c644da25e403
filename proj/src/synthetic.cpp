#include "geodep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "geodep/errors.hpp"
#include "geodep/linalg.hpp"

namespace geodep {
namespace {

// Stream offsets from the single user seed.
constexpr std::uint64_t kFieldStream = 0;
constexpr std::uint64_t kSubsampleStream = 1;

VectorXd correlated_draw(const MatrixXd& points, const KernelParams& kernel, std::uint64_t seed) {
  MatrixXd gram = rbf_gram(points, points, kernel);
  gram.diagonal().array() += kernel.noise_var;
  const SpdFactor factor = factorize_spd(gram);
  std::mt19937_64 rng(seed + kFieldStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd eps(points.rows());
  for (Index i = 0; i < eps.size(); ++i) eps(i) = normal(rng);
  return factor.lower() * eps;
}

}  // namespace

void FieldSpec::validate() const {
  if (nx < 2 || ny < 2) throw ValidationError("grid needs at least 2 points along each axis");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("grid spacing must be positive");
  if (!(kernel.signal_var >= 0.0) || !(kernel.length_scale > 0.0) || !(kernel.noise_var >= 0.0))
    throw ValidationError("field kernel requires signal_var >= 0, length_scale > 0, noise_var >= 0");
  if (kernel.signal_var + kernel.noise_var <= 0.0) throw ValidationError("field kernel has zero total variance");
  if (generator == Generator::TwoRegime && !(gap >= 0.0)) throw ValidationError("regime gap must be non-negative");
}

MatrixXd FieldSpec::grid() const {
  MatrixXd pts(static_cast<Index>(nx) * ny, 2);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Index k = static_cast<Index>(iy) * nx + ix;
      pts(k, 0) = ix * spacing;
      pts(k, 1) = iy * spacing;
    }
  return pts;
}

SampleSet sample_stationary_field(const FieldSpec& spec) {
  spec.validate();
  if (spec.generator != Generator::StationaryGp) throw ValidationError("spec is not a stationary-gp generator");
  MatrixXd pts = spec.grid();
  VectorXd z = correlated_draw(pts, spec.kernel, spec.seed);
  return SampleSet(std::move(pts), std::move(z));
}

RegimeField sample_two_regime_field(const FieldSpec& spec) {
  spec.validate();
  if (spec.generator != Generator::TwoRegime) throw ValidationError("spec is not a two-regime generator");
  MatrixXd pts = spec.grid();
  const double cx = 0.5 * (spec.nx - 1) * spec.spacing;
  const double cy = 0.5 * (spec.ny - 1) * spec.spacing;

  std::vector<int> labels(static_cast<std::size_t>(pts.rows()));
  for (Index k = 0; k < pts.rows(); ++k) {
    const double x = pts(k, 0) - cx;
    const double y = pts(k, 1) - cy;
    const bool in_b = std::visit(
        [&](const auto& g) {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, HalfPlane>) {
            return x * std::cos(g.angle) + y * std::sin(g.angle) > g.offset;
          } else {
            return std::hypot(x - g.cx, y - g.cy) < g.radius;
          }
        },
        spec.geometry);
    labels[static_cast<std::size_t>(k)] = in_b ? 1 : 0;
  }
  const auto in_b = std::count(labels.begin(), labels.end(), 1);
  if (in_b == 0 || in_b == pts.rows()) throw ValidationError("regime geometry leaves one regime empty");

  VectorXd z = correlated_draw(pts, spec.kernel, spec.seed);
  for (Index k = 0; k < z.size(); ++k) z(k) += spec.gap * labels[static_cast<std::size_t>(k)];
  return {SampleSet(std::move(pts), std::move(z)), std::move(labels)};
}

Subsample random_subsample(const SampleSet& field, Index n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("subsample size must be at least 1");
  if (n > field.size()) throw ValidationError("subsample size exceeds the field size");
  std::vector<Index> order(static_cast<std::size_t>(field.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed + kSubsampleStream);
  // Partial Fisher-Yates: the first n entries are a uniform draw without replacement.
  for (Index k = 0; k < n; ++k) {
    std::uniform_int_distribution<Index> pick(k, field.size() - 1);
    std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }
  order.resize(static_cast<std::size_t>(n));
  return {field.rows(order), std::move(order)};
}

namespace fixtures {

FieldSpec two_regime_spec(std::uint64_t seed) {
  FieldSpec spec;
  spec.generator = Generator::TwoRegime;
  spec.kernel = {1.0, 3.0, 0.01};
  spec.geometry = HalfPlane{0.0, 0.0};
  spec.gap = 10.0 * std::sqrt(spec.kernel.signal_var + spec.kernel.noise_var);
  spec.seed = seed;
  return spec;
}

FieldSpec stationary_spec(std::uint64_t seed) {
  FieldSpec spec;
  spec.generator = Generator::StationaryGp;
  spec.kernel = {1.0, 6.0, 0.01};
  spec.seed = seed;
  return spec;
}

LabelledSample two_regime_sample(std::uint64_t seed, Index n) {
  const RegimeField field = sample_two_regime_field(two_regime_spec(seed));
  Subsample sub = random_subsample(field.field, n, seed);
  std::vector<int> labels;
  labels.reserve(sub.indices.size());
  for (Index k : sub.indices) labels.push_back(field.labels[static_cast<std::size_t>(k)]);
  return {std::move(sub.samples), std::move(labels)};
}

LabelledSample stationary_sample(std::uint64_t seed, Index n) {
  const SampleSet field = sample_stationary_field(stationary_spec(seed));
  Subsample sub = random_subsample(field, n, seed);
  return {std::move(sub.samples), std::vector<int>(static_cast<std::size_t>(n), 0)};
}

}  // namespace fixtures

}  // namespace geodep
