#include <algorithm>
#include <vector>

#include "doctest.h"
#include "scatterlab/backscatter.hpp"
#include "scatterlab/inverse.hpp"

using namespace scatterlab;
using namespace scatterlab::inverse;

namespace {

FarFieldDataset linear_dataset(double kmin, double kmax, double step, double m) {
  FarFieldDataset ds;
  ds.directions = standard_directions(6);
  ds.frequencies = frequency_grid(kmin, kmax, step);
  ds.m = m;
  for (std::size_t d = 0; d < ds.n_dir(); ++d)
    for (double s : ds.frequencies) ds.values.push_back(cdouble(s + double(d), 2.0 * s));
  return ds;
}

gridfield::PotentialRealization random_potential(int n, std::uint64_t seed, double amplitude) {
  auto g = make_grid(n, 0.5);
  auto h = std::make_shared<const gridfield::StrengthField>(
      gridfield::strength_preset(gridfield::Preset::single_bump, g, amplitude, 0.4));
  return gridfield::synthesize_potential(h, 3.0, seed);
}

}  // namespace

TEST_SUITE("inverse") {
  TEST_CASE("tau grid and frequency step") {
    auto t = tau_grid(8, 0.4);
    REQUIRE(t.size() == 8);
    CHECK(t.front() == doctest::Approx(0.05));
    CHECK(t.back() == doctest::Approx(0.4));
    CHECK(frequency_step(8, 0.4) == doctest::Approx(0.0125));
    CHECK_THROWS_AS(tau_grid(4, 0.5), PreconditionError);
    CHECK_THROWS_AS(tau_grid(0), PreconditionError);
  }

  TEST_CASE("linear interpolation is exact on linear data") {
    auto ds = linear_dataset(2.0, 6.0, 0.25, 3.0);
    CHECK(interpolate(ds, 2, 3.0) == ds.at(2, 4));
    cdouble v = interpolate(ds, 1, 3.1);
    CHECK(std::abs(v - cdouble(4.1, 6.2)) < 1e-13);
    CHECK_THROWS_AS(interpolate(ds, 0, 6.5), PreconditionError);
  }

  TEST_CASE("band correlation of a constant amplitude") {
    FarFieldDataset ds;
    ds.directions = standard_directions(6);
    ds.frequencies = frequency_grid(3.0, 7.0, 0.125);
    ds.m = 1.0;
    ds.values.assign(6 * ds.n_freq(), cdouble(0.6, -0.8));
    // (16 pi^2 / k) int_k^{2k} 2s ds = 16 pi^2 * 3k
    CHECK(band_correlation(ds, std::size_t{0}, 0.25, 3.1).real() == doctest::Approx(16.0 * pi * pi * 3.0 * 3.1));
    CHECK(band_correlation(ds, Vec3{0, 0, -1}, 0.25, 3.0).imag() == doctest::Approx(0.0));
    CHECK_THROWS_AS(band_correlation(ds, Vec3{0.6, 0.8, 0}, 0.25, 3.0), PreconditionError);
    CHECK_THROWS_WITH_AS(band_correlation(ds, std::size_t{0}, 0.25, 3.5), doctest::Contains("not covered"),
                         PreconditionError);
    CHECK_THROWS_AS(band_correlation(ds, std::size_t{0}, 0.5, 3.0), PreconditionError);
  }

  TEST_CASE("symmetrize pairs antipodes and mirrors lonely directions") {
    HhatSamples hh;
    hh.tau_grid = {0.1, 0.2};
    hh.theta_grid = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}};
    hh.estimates = {cdouble(1, 1), cdouble(3, 1), cdouble(5, 2), cdouble(2, 0), cdouble(2, 0), cdouble(0, 1)};
    symmetrize(hh);
    REQUIRE(hh.theta_grid.size() == 4);
    CHECK(hh.theta_grid[3] == Vec3{0, 0, -1});
    CHECK(hh.at(0, 0) == cdouble(2, 0));
    CHECK(hh.at(0, 1) == cdouble(2, 0));
    CHECK(hh.at(0, 2) == cdouble(5, 2));
    CHECK(hh.at(0, 3) == cdouble(5, -2));
    CHECK(hh.at(1, 3) == cdouble(0, -1));
  }

  TEST_CASE("taper") {
    CHECK(taper(0.5) == 1.0);
    CHECK(taper(0.9) == doctest::Approx(0.5));
    CHECK(taper(1.0) == 0.0);
    CHECK(taper(1.3) == 0.0);
  }

  TEST_CASE("analytic transforms at zero match grid integrals") {
    auto g = make_grid(64, 0.5);
    for (auto p : {gridfield::Preset::single_bump, gridfield::Preset::two_bumps, gridfield::Preset::annulus}) {
      auto h = gridfield::strength_preset(p, g, 1.3, 0.4);
      double sum = 0.0;
      for (double v : h.values) sum += v * g.cell_volume;
      CAPTURE(gridfield::preset_name(p));
      CHECK(analytic_hhat(h, {0, 0, 0}).real() == doctest::Approx(sum).epsilon(1e-6));
    }
    auto h = gridfield::strength_preset(gridfield::Preset::single_bump, g, 1.0, 0.4);
    Vec3 xi{3.0, -2.0, 1.0};
    cdouble sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += h.values[i] * std::exp(cdouble(0, -dot(xi, g.node(i)))) * g.cell_volume;
    CHECK(std::abs(analytic_hhat(h, xi) - sum) < 1e-7 * std::abs(sum));
  }

  TEST_CASE("reconstruction from exact samples approaches the projection") {
    auto g = make_grid(32, 0.5);
    auto h = gridfield::strength_preset(gridfield::Preset::single_bump, g, 1.0, 0.4);
    auto exact = [&](Vec3 xi) { return analytic_hhat(h, xi); };
    auto pb = band_spectrum(exact);
    HhatSamples hh;
    hh.tau_grid = tau_grid(8, 0.45);
    hh.theta_grid = standard_directions(26);
    for (std::size_t t = 0; t < hh.tau_grid.size(); ++t)
      for (std::size_t d = 0; d < hh.theta_grid.size(); ++d) hh.estimates.push_back(exact(hh.xi(t, d)));
    auto rec = reconstruct_strength(hh, g, &pb);
    CHECK(rec.imaginary_residue < 1e-12);
    CHECK(rec.l2_error < 0.05 * band_l2_distance(pb));

    HhatSamples low = hh;
    low.tau_grid = tau_grid(8, 0.3);
    CHECK_THROWS_WITH_AS(reconstruct_strength(low, g), doctest::Contains("insufficient xi coverage"),
                         PreconditionError);
  }

  TEST_CASE("estimate_hhat rejects coarse grids") {
    auto ds = linear_dataset(2.0, 6.0, 0.25, 3.0);
    CHECK_THROWS_WITH_AS(estimate_hhat(ds, 3, 6), doctest::Contains("grid too coarse"), PreconditionError);
    CHECK_THROWS_WITH_AS(estimate_hhat(ds, 8, 5), doctest::Contains("grid too coarse"), PreconditionError);
    auto hh = estimate_hhat(ds, 4, 6, 0.0, 0.4);
    CHECK(hh.k_band == doctest::Approx(2.8));
    for (std::size_t t = 0; t < hh.tau_grid.size(); ++t) CHECK(hh.at(t, 0) == std::conj(hh.at(t, 1)));
  }

  TEST_CASE("band norm is the full-space norm of the projection") {
    // one period of the lattice transform is a box of side 2 pi / xi_step = 16 pi, sampled exactly by 64 nodes
    GridSpec3 g = make_grid(64, 8.0 * pi);
    auto pb = band_spectrum([](Vec3 xi) { return cdouble(1.0 + xi.x, 0.5 * xi.y); });
    auto field = band_limited_projection([](Vec3 xi) { return cdouble(1.0 + xi.x, 0.5 * xi.y); }, g);
    CHECK(band_l2_distance(pb) == doctest::Approx(l2_distance(g, field)).epsilon(1e-12));
    auto half = pb;
    for (auto& v : half.values) v *= 0.5;
    CHECK(band_l2_distance(pb, half) == doctest::Approx(0.5 * band_l2_distance(pb)));
    ReconstructionOptions fine;
    fine.xi_step = 0.1;
    CHECK_THROWS_AS(band_l2_distance(pb, band_spectrum([](Vec3) { return cdouble(1.0); }, fine)), PreconditionError);
  }

  TEST_CASE("l2 distance") {
    auto g = make_grid(16, 1.0);
    std::vector<double> a(g.size(), 2.0), b(g.size(), 1.0);
    CHECK(l2_distance(g, a, b) == doctest::Approx(std::sqrt(8.0)));
    CHECK(l2_distance(g, a) == doctest::Approx(std::sqrt(32.0)));
  }

  TEST_CASE("stability right-hand side") {
    const double eps_sq = 1e-6;
    double loglog = std::log(std::abs(std::log(1e-3)));
    double arg = 1e-6 + (1.0 + std::pow(4.0, 3.8)) / (1e6 * loglog);
    CHECK(stability_rhs(eps_sq, 4.0, 1e6, 1.0, 0.2, 1.0, 0.25, 1.0) ==
          doctest::Approx(std::pow(std::abs(std::log(arg)), -0.25)));
    CHECK_THROWS_AS(stability_rhs(0.1, 4.0, 1e6, 1.0, 0.2, 1.0, 0.25, 1.0), PreconditionError);
    CHECK_THROWS_AS(stability_rhs(0.0, 4.0, 1e6, 1.0, 0.2, 1.0, 0.25, 1.0), PreconditionError);
    CHECK_THROWS_WITH_AS(stability_rhs(eps_sq, 4.0, 32.0, 1.0, 0.2, 1.0, 0.25, 1.0), doctest::Contains("not applicable"),
                         PreconditionError);
    CHECK(beta2_from_regularity(2.0) == doctest::Approx(0.25));
  }

  TEST_CASE("data discrepancy") {
    auto V1 = random_potential(16, 4, 1.0);
    auto V2 = random_potential(16, 4, 1.1);
    auto dirs = standard_directions(6);
    auto freqs = frequency_grid(3.0, 2.0 * 8.0 + 0.45, 0.05);
    auto ds1 = born0_sweep(V1, dirs, freqs);
    auto ds2 = born0_sweep(V2, dirs, freqs);
    std::vector<double> taus{0.0, 0.15, 0.45};
    CHECK(data_discrepancy(ds1, ds1, 4.0, 8.0, taus) == 0.0);
    double fast = data_discrepancy(ds1, ds2, 4.0, 8.0, taus);
    double slow = 0.0;
    for (double f : freqs)
      if (f > 4.0 && f <= 8.0)
        for (double t : taus) slow = std::max(slow, band_discrepancy(ds1, ds2, f, t));
    CHECK(fast > 0.0);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-11));
    CHECK_THROWS_AS(data_discrepancy(ds1, ds2, 8.0, 8.0, taus), PreconditionError);
    auto other = ds2;
    other.frequencies.back() += 1e-3;
    CHECK_THROWS_WITH_AS(data_discrepancy(ds1, other, 4.0, 8.0, taus), doctest::Contains("grid mismatch"),
                         PreconditionError);
  }
}
