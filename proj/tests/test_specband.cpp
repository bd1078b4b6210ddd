#include <vector>

#include "doctest.h"
#include "scatterlab/backscatter.hpp"
#include "scatterlab/inverse.hpp"
#include "scatterlab/specband.hpp"

using namespace scatterlab;
using namespace scatterlab::specband;

namespace {

gridfield::PotentialRealization random_potential(int n, std::uint64_t seed) {
  auto g = make_grid(n, 0.5);
  auto h = std::make_shared<const gridfield::StrengthField>(
      gridfield::strength_preset(gridfield::Preset::single_bump, g, 1.0, 0.4));
  return gridfield::synthesize_potential(h, 3.0, seed);
}

}  // namespace

TEST_SUITE("specband") {
  TEST_CASE("resolvent norm decays along the real axis") {
    auto g = make_grid(16, 0.5);
    auto probe = probe_resolvent({cdouble(4.0), cdouble(8.0), cdouble(16.0), cdouble(32.0)}, g, 1.0);
    REQUIRE(probe.norms.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(probe.norms[i] < probe.norms[i - 1]);
    CHECK(probe.bound_shape[0] == probe.norms[0]);
    CHECK(probe.bound_shape[1] == doctest::Approx(probe.norms[0] * 5.0 / 9.0));
    CHECK(probe.cutoff_diam == 1.0);
  }

  TEST_CASE("resolvent norm grows into the lower half plane") {
    auto g = make_grid(16, 0.5);
    double up = resolvent_norm_estimate(cdouble(8.0, 0.0), g, 1.0);
    double down = resolvent_norm_estimate(cdouble(8.0, -2.0), g, 1.0);
    CHECK(down > up);
    CHECK_THROWS_AS(resolvent_norm_estimate(cdouble(0.0), g, 1.0), PreconditionError);
  }

  TEST_CASE("slab lower bound") {
    SlabParams slab{4.0, 32.0, 0.5};
    double a = 28.0;
    double expect = 64.0 * a * 0.5 / (3.0 * pi * pi * (a * a + 1.0)) * std::exp(pi * (14.0 - 40.0));
    CHECK(mu_lower_bound(slab, 40.0) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(mu_lower_bound(slab, 50.0) < mu_lower_bound(slab, 40.0));
    CHECK_THROWS_AS(mu_lower_bound(slab, 20.0), PreconditionError);
    CHECK_THROWS_AS(mu_lower_bound({4.0, 4.0, 0.5}, 40.0), PreconditionError);
  }

  TEST_CASE("complex table lookups fail loudly on missing frequencies") {
    auto V = random_potential(16, 3);
    auto dirs = standard_directions(2);
    auto freqs = epsilon_band_frequencies(cdouble(4.0, -0.5), 0.25, 5);
    CHECK(freqs.size() == 20);
    auto t = born0_complex_table(V, dirs, freqs);
    CHECK_NOTHROW(t.at(1, cdouble(-4.25, 0.5)));
    CHECK_THROWS_WITH_AS(t.at(0, cdouble(9.0, 0.0)), doctest::Contains("missing complex-frequency coverage"),
                         PreconditionError);
    CHECK(epsilon_band_complex(t, t, cdouble(4.0, -0.5), 0.25, 3.0, 5) == cdouble(0.0));
  }

  TEST_CASE("epsilon at real k reduces to the band discrepancy") {
    auto V1 = random_potential(16, 5);
    auto V2 = random_potential(16, 6);
    auto dirs = standard_directions(6);
    const double k = 4.0, tau = 0.25;
    auto grid = frequency_grid(k, 2.0 * k + tau, 0.125);
    auto ds1 = born0_sweep(V1, dirs, grid);
    auto ds2 = born0_sweep(V2, dirs, grid);
    auto freqs = epsilon_band_frequencies(cdouble(k), tau, 33);
    auto t1 = born0_complex_table(V1, dirs, freqs);
    auto t2 = born0_complex_table(V2, dirs, freqs);
    cdouble eps = epsilon_band_complex(t1, t2, cdouble(k), tau, 3.0, 33);
    double band = inverse::band_discrepancy(ds1, ds2, k, tau);
    CHECK(band > 0.0);
    CHECK(std::abs(eps.imag()) < 1e-12 * band);
    CHECK(eps.real() == doctest::Approx(band).epsilon(1e-10));
  }

  TEST_CASE("Neumann threshold") {
    auto V = random_potential(16, 8);
    std::vector<double> ks{2.0, 4.0, 8.0, 16.0, 32.0};
    double t = neumann_threshold(V, ks);
    CHECK((t == kNoThreshold || t >= 2.0));
    auto zero = gridfield::potential_from_values(V.grid, std::vector<double>(V.grid.size(), 0.0));
    CHECK(neumann_threshold(zero, ks) == 2.0);
    CHECK_THROWS_AS(neumann_threshold(V, {4.0, 2.0}), PreconditionError);
  }
}
