#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "geodep/errors.hpp"
#include "geodep/synthetic.hpp"
#include "geodep/variogram.hpp"
#include "support.hpp"

using namespace geodep;

namespace {

double variance(const VectorXd& v) { return (v.array() - v.mean()).square().mean(); }

}  // namespace

TEST_SUITE("synthetic") {
  TEST_CASE("grid layout is row-major") {
    FieldSpec spec;
    spec.nx = 3;
    spec.ny = 2;
    spec.spacing = 2.0;
    const MatrixXd g = spec.grid();
    REQUIRE(g.rows() == 6);
    CHECK(g(4, 0) == 2.0);
    CHECK(g(4, 1) == 2.0);
    CHECK(g(2, 0) == 4.0);
    CHECK(g(2, 1) == 0.0);
  }

  TEST_CASE("vanishing signal leaves the noise") {
    FieldSpec spec;
    spec.kernel = {1e-12, 3.0, 0.5};
    const SampleSet f = sample_stationary_field(spec);
    CHECK(f.size() == 900);
    CHECK(variance(f.values()) == doctest::Approx(0.5).epsilon(0.2));
  }

  TEST_CASE("fixed seed is bit-identical") {
    const FieldSpec spec = fixtures::stationary_spec(11);
    CHECK(sample_stationary_field(spec).values() == sample_stationary_field(spec).values());
    const auto a = fixtures::two_regime_sample(11, 20);
    const auto b = fixtures::two_regime_sample(11, 20);
    CHECK(a.samples.values() == b.samples.values());
    CHECK(a.labels == b.labels);
  }

  TEST_CASE("Monte Carlo covariance matches the kernel") {
    FieldSpec spec;
    spec.nx = spec.ny = 5;
    spec.kernel = {1.0, 1.5, 0.0};
    const Index a = 0, b = 6;  // (0,0) and (1,1)
    std::vector<double> prod;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      spec.seed = seed;
      const VectorXd z = sample_stationary_field(spec).values();
      prod.push_back(z(a) * z(b));
    }
    double mean = 0.0;
    for (double p : prod) mean += p;
    mean /= prod.size();
    double var = 0.0;
    for (double p : prod) var += (p - mean) * (p - mean);
    const double se = std::sqrt(var / (prod.size() - 1) / prod.size());
    const double kernel = std::exp(-2.0 / (2.0 * 1.5 * 1.5));
    CHECK(std::abs(mean - kernel) <= 3.0 * se);
  }

  TEST_CASE("two-regime fields") {
    SUBCASE("zero gap reproduces the stationary draw") {
      FieldSpec spec = fixtures::two_regime_spec(5);
      spec.gap = 0.0;
      FieldSpec stationary = spec;
      stationary.generator = Generator::StationaryGp;
      const RegimeField f = sample_two_regime_field(spec);
      CHECK(f.field.values() == sample_stationary_field(stationary).values());
      CHECK(std::count(f.labels.begin(), f.labels.end(), 1) > 0);
    }
    SUBCASE("regime means differ by the gap") {
      const FieldSpec spec = fixtures::two_regime_spec(7);
      const RegimeField f = sample_two_regime_field(spec);
      double sa = 0, sb = 0;
      int na = 0, nb = 0;
      for (Index k = 0; k < f.field.size(); ++k) {
        if (f.labels[static_cast<std::size_t>(k)] == 1) {
          sb += f.field.values()(k);
          ++nb;
        } else {
          sa += f.field.values()(k);
          ++na;
        }
      }
      const double sd = std::sqrt(spec.kernel.signal_var + spec.kernel.noise_var);
      CHECK(std::abs((sb / nb - sa / na) - spec.gap) <= sd);
    }
    SUBCASE("half-plane geometry labels by side") {
      FieldSpec spec = fixtures::two_regime_spec(7);
      spec.geometry = HalfPlane{0.0, 0.0};
      const RegimeField f = sample_two_regime_field(spec);
      for (Index k = 0; k < f.field.size(); ++k)
        CHECK(f.labels[static_cast<std::size_t>(k)] == (f.field.coords()(k, 0) > 14.5 ? 1 : 0));
    }
    SUBCASE("degenerate geometry is rejected") {
      FieldSpec spec = fixtures::two_regime_spec(7);
      spec.geometry = Disc{0.0, 0.0, 100.0};
      CHECK_THROWS_AS(sample_two_regime_field(spec), ValidationError);
      spec.geometry = HalfPlane{0.0, 100.0};
      CHECK_THROWS_AS(sample_two_regime_field(spec), ValidationError);
      spec.geometry = Disc{};
      spec.gap = -1.0;
      CHECK_THROWS_AS(sample_two_regime_field(spec), ValidationError);
    }
    SUBCASE("generator mismatch is rejected") {
      CHECK_THROWS_AS(sample_stationary_field(fixtures::two_regime_spec(1)), ValidationError);
      CHECK_THROWS_AS(sample_two_regime_field(fixtures::stationary_spec(1)), ValidationError);
    }
  }

  TEST_CASE("subsampling") {
    const SampleSet field = sample_stationary_field(fixtures::stationary_spec(3));
    SUBCASE("full size is a permutation") {
      const Subsample s = random_subsample(field, field.size(), 9);
      std::set<Index> seen(s.indices.begin(), s.indices.end());
      CHECK(seen.size() == static_cast<std::size_t>(field.size()));
      for (std::size_t k = 0; k < s.indices.size(); ++k)
        CHECK(s.samples.values()(static_cast<Index>(k)) == field.values()(s.indices[k]));
    }
    SUBCASE("same seed, same draw") {
      CHECK(random_subsample(field, 20, 4).indices == random_subsample(field, 20, 4).indices);
      CHECK(random_subsample(field, 20, 4).indices != random_subsample(field, 20, 5).indices);
    }
    SUBCASE("oversized request") {
      CHECK_THROWS_AS(random_subsample(field, field.size() + 1, 1), ValidationError);
      CHECK_THROWS_AS(random_subsample(field, 0, 1), ValidationError);
    }
  }

  TEST_CASE("the two-regime fixture has a bimodal variogram cloud") {
    const auto fixture = fixtures::two_regime_sample(7, 20);
    const auto count_b = std::count(fixture.labels.begin(), fixture.labels.end(), 1);
    CHECK(count_b >= 3);
    CHECK(count_b <= 17);
    const VariogramCloud cloud = empirical_semivariance(fixture.samples);
    const BinnedVariogram binned = bin_cloud(cloud, 10, cloud.max_distance());
    CHECK(binned.bins.back().gamma_mean >= 4.0 * binned.bins.front().gamma_mean);
  }
}
