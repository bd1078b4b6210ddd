#include <random>
#include <vector>

#include "doctest.h"
#include "scatterlab/ergodic.hpp"

using namespace scatterlab;
using namespace scatterlab::ergodic;

namespace {

SampledPath constant_path(double s0, double s1, double step, double value) {
  SampledPath p{s0, step, {}};
  auto n = static_cast<std::size_t>(std::lround((s1 - s0) / step)) + 1;
  p.values.assign(n, value);
  return p;
}

std::vector<FarFieldDataset> noise_ensemble(std::size_t R, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<FarFieldDataset> out(R);
  for (auto& ds : out) {
    ds.directions = standard_directions(2);
    ds.frequencies = frequency_grid(2.0, 6.0, 0.05);
    ds.m = 3.0;
    for (std::size_t i = 0; i < 2 * ds.n_freq(); ++i) ds.values.push_back(cdouble(nd(gen), nd(gen)) * 1e-2);
  }
  return out;
}

}  // namespace

TEST_SUITE("ergodic") {
  TEST_CASE("component tags") {
    for (auto c : kAllComponents) CHECK(parse_component(component_name(c)) == c);
    CHECK_THROWS_AS(parse_component("bogus"), PreconditionError);
    cdouble z(1.0, 2.0), zt(3.0, 5.0);
    CHECK(component_value(Component::re_zt_plus_im_z, z, zt) == 5.0);
    CHECK(component_value(Component::im_zt_minus_re_z, z, zt) == 4.0);
    CHECK(component_value(Component::im_z_minus_im_zt, z, zt) == -3.0);
  }

  TEST_CASE("band statistic and time average of simple paths") {
    auto zero = constant_path(0.0, 40.0, 0.05, 0.0);
    CHECK(band_statistic(zero, 10.0, 0.2) == 0.0);
    auto one = constant_path(0.0, 40.0, 0.05, 1.0);
    CHECK(band_statistic(one, 10.0, 0.0) == doctest::Approx(1.0));
    CHECK(band_statistic(one, 10.02, 0.2) == doctest::Approx(std::pow(10.02, 0.2)));
    SampledPath lin{0.0, 0.05, {}};
    for (int i = 0; i <= 800; ++i) lin.values.push_back(0.05 * i);
    CHECK(time_average(lin, 30.0, 0.1) == doctest::Approx(std::pow(30.0, -0.9) * 450.0));
    CHECK(time_average(lin, 30.01, 0.0) == doctest::Approx(30.01 / 2.0));
  }

  TEST_CASE("epsilon weighting grows with k") {
    auto one = constant_path(0.0, 40.0, 0.05, 1.0);
    CHECK(band_statistic(one, 8.0, 0.1) < band_statistic(one, 8.0, 0.2));
    CHECK(band_statistic(one, 16.0, 0.2) > band_statistic(one, 8.0, 0.2));
  }

  TEST_CASE("path preconditions") {
    auto coarse = constant_path(0.0, 40.0, 0.1, 1.0);
    CHECK_THROWS_AS(band_statistic(coarse, 8.0, 0.1), PreconditionError);
    auto short_path = constant_path(0.0, 10.0, 0.05, 1.0);
    CHECK_THROWS_WITH_AS(band_statistic(short_path, 8.0, 0.1), doctest::Contains("does not cover"),
                         PreconditionError);
    CHECK_THROWS_AS(band_statistic(short_path, 2.0, 0.25), PreconditionError);
    auto shifted = constant_path(1.0, 10.0, 0.05, 1.0);
    CHECK_THROWS_AS(time_average(shifted, 5.0, 0.1), PreconditionError);
  }

  TEST_CASE("leave-one-out centering sums to zero across realizations") {
    auto ens = noise_ensemble(100, 7);
    auto paths = centered_square_process(ens, 1, 0.2, Component::re_z_minus_re_zt);
    REQUIRE(paths.size() == 100);
    CHECK(paths[0].s_end() == doctest::Approx(5.8));
    for (std::size_t i = 0; i < paths[0].values.size(); i += 7) {
      double sum = 0.0, scale = 0.0;
      for (const auto& p : paths) {
        sum += p.values[i];
        scale += std::abs(p.values[i]);
      }
      CHECK(std::abs(sum) < 1e-12 * scale);
    }
    ens.pop_back();
    CHECK_THROWS_WITH_AS(centered_square_process(ens, 1, 0.2, Component::re_z), doctest::Contains("ensemble too small"),
                         PreconditionError);
  }

  TEST_CASE("white noise paths have no covariance at positive lags") {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> nd;
    std::vector<SampledPath> paths(200);
    for (auto& p : paths) {
      p = {0.0, 0.05, std::vector<double>(400)};
      for (auto& v : p.values) v = nd(gen);
    }
    auto rep = covariance_decay_check(paths, {0, 1, 5, 20});
    CHECK(rep.covariance[0] == doctest::Approx(1.0).epsilon(0.02));
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(rep.covariance[i]) < 4.0 * rep.standard_error[i]);
    CHECK(rep.lags[2] == doctest::Approx(0.25));
    paths.pop_back();
    CHECK_THROWS_AS(covariance_decay_check(paths, {1}), PreconditionError);
  }

  TEST_CASE("exceedance probabilities") {
    YTable t;
    t.k_grid = {4.0, 8.0, 16.0, 32.0};
    t.realizations = 200;
    t.values.assign(800, 0.0);
    CHECK(exceedance_probability(t, 4.0) == 0.0);
    std::mt19937_64 gen(2);
    std::normal_distribution<double> nd;
    for (auto& v : t.values) v = nd(gen);
    auto sweep = exceedance_sweep(t, {4.0, 8.0, 16.0, 32.0});
    for (std::size_t i = 1; i < 4; ++i) CHECK(sweep.probability[i] <= sweep.probability[i - 1]);
    CHECK_THROWS_AS(exceedance_probability(t, 40.0), PreconditionError);
    t.realizations = 199;
    CHECK_THROWS_AS(exceedance_probability(t, 4.0), PreconditionError);
  }

  TEST_CASE("OU mixture approximates the power-law correlation") {
    auto mix = make_ou_mixture(0.0, 0.6);
    for (double lag : {0.0, 0.5, 3.0, 30.0, 300.0}) {
      CAPTURE(lag);
      CHECK(mix.correlation(lag) == doctest::Approx(std::pow(1.0 + lag, -0.6)).epsilon(2e-3));
    }
    auto grow = make_ou_mixture(0.2, 0.6);
    CHECK(grow.covariance(3.0, 3.0) == doctest::Approx(std::pow(4.0, 0.2) * grow.correlation(0.0)));
    CHECK_THROWS_AS(make_ou_mixture(0.4, 0.6), PreconditionError);
    CHECK_THROWS_AS(make_ou_mixture(0.0, 1.0), PreconditionError);
  }

  TEST_CASE("synthetic OU paths reproduce the mixture covariance") {
    auto mix = make_ou_mixture(0.0, 0.8);
    auto paths = synthetic_ou_paths(mix, 0.05, 20.0, 9, 400);
    CHECK(paths[3].values.size() == 401);
    auto rep = covariance_decay_check(paths, {0, 20, 100});
    for (std::size_t i = 0; i < rep.lags.size(); ++i) {
      CAPTURE(rep.lags[i]);
      CHECK(std::abs(rep.covariance[i] - mix.correlation(rep.lags[i])) < 4.0 * rep.standard_error[i]);
    }
    auto again = synthetic_ou_path(mix, 0.05, 20.0, 9, 3);
    CHECK(again.values == paths[3].values);
  }
}
