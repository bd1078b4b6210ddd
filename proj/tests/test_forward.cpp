#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <random>
#include <vector>

#include "doctest.h"
#include "scatterlab/backscatter.hpp"
#include "scatterlab/forward.hpp"
#include "scatterlab/gmres.hpp"
#include "scatterlab/kernels.hpp"
#include "scatterlab/parallel.hpp"
#include "scatterlab/reference.hpp"

using namespace scatterlab;
using namespace scatterlab::forward;

namespace {

GridSpec3 small_grid() { return {8, 0.5, 0.125, 0.125 * 0.125 * 0.125}; }

std::vector<cdouble> random_field(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<cdouble> f(n);
  for (auto& v : f) v = cdouble(nd(gen), nd(gen));
  return f;
}

double rel_diff(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

PotentialRealization bump_potential(int n, double L, double amp, double radius) {
  auto g = make_grid(n, L);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double r = norm(g.node(i)) / radius;
    v[i] = r < 1.0 ? amp * std::exp(-1.0 / (1.0 - r * r)) * (1.0 + 0.3 * g.node(i).x / radius) : 0.0;
  }
  return gridfield::potential_from_values(g, v);
}

}  // namespace

TEST_SUITE("forward") {
  TEST_CASE("collocation resolvent equals the direct kernel sum") {
    auto g = small_grid();
    auto f = random_field(g.size(), 1);
    for (cdouble k : {cdouble(6.0, 0.0), cdouble(3.0, -0.7), cdouble(20.0, 0.5)}) {
      for (double L : {1.0, 0.6}) {
        CAPTURE(k);
        CAPTURE(L);
        auto fast = apply_free_resolvent({g, f}, k, L).values;
        auto slow = reference::direct_resolvent(g, f, k, L);
        CHECK(rel_diff(fast, slow) < 1e-12);
      }
    }
    CHECK_THROWS_AS(apply_free_resolvent({g, f}, 6.0, 1.01), PreconditionError);
  }

  TEST_CASE("spectral symbol matches quadrature of the truncated kernel") {
    using boost::math::quadrature::gauss_kronrod;
    const double L = 0.8;
    for (cdouble k : {cdouble(5.0, 0.0), cdouble(12.0, -1.0)}) {
      for (double rho : {0.0, 0.3, 7.0, 40.0}) {
        auto re = [&](double r) {
          cdouble v = std::exp(cdouble(0, 1) * k * r) * (rho == 0.0 ? r : std::sin(rho * r) / rho);
          return v.real();
        };
        auto im = [&](double r) {
          cdouble v = std::exp(cdouble(0, 1) * k * r) * (rho == 0.0 ? r : std::sin(rho * r) / rho);
          return v.imag();
        };
        cdouble q(gauss_kronrod<double, 61>::integrate(re, 0.0, L, 15, 1e-14),
                  gauss_kronrod<double, 61>::integrate(im, 0.0, L, 15, 1e-14));
        CHECK(std::abs(truncated_green_symbol_value(rho, k, L) - q) < 1e-11 * std::max(1.0, std::abs(q)));
      }
    }
  }

  TEST_CASE("spectral and collocation schemes agree on smooth fields") {
    auto g = make_grid(16, 0.5);
    std::vector<cdouble> f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      double r2 = dot(g.node(i), g.node(i));
      f[i] = std::exp(-40.0 * r2);
    }
    auto a = apply_free_resolvent({g, f}, 5.0, 1.0, GreenScheme::collocation).values;
    auto b = apply_free_resolvent({g, f}, 5.0, 1.0, GreenScheme::spectral).values;
    CHECK(rel_diff(a, b) < 0.05);
  }

  TEST_CASE("self cell integral") {
    const double dv = 1e-3;
    const double a = std::cbrt(3.0 * dv / (4.0 * pi));
    CHECK(std::abs(reference::self_cell_integral(1e-8, dv) - a * a / 2.0) < 1e-12);
    for (double ka : {0.1, 0.45, 0.55, 3.0}) {
      cdouble k(ka / a, 0.0);
      cdouble ika(0.0, ka);
      cdouble closed = (std::exp(ika) * (1.0 - ika) - 1.0) / (k * k);
      CHECK(std::abs(reference::self_cell_integral(k, dv) - closed) < 1e-11 * std::abs(closed));
    }
  }

  TEST_CASE("incident waves") {
    auto g = make_grid(16, 0.5);
    auto inc = make_incident({0, 0.6, 0.8}, 3.0);
    auto u = incident_field(g, inc);
    auto y = g.node(1, 5, 9);
    CHECK(std::abs(u[g.index(1, 5, 9)] - std::exp(cdouble(0, 3.0 * dot(inc.direction, y)))) < 1e-14);
    CHECK_THROWS_AS(make_incident({1, 1, 0}, 3.0), PreconditionError);
  }

  TEST_CASE("zero potential scatters nothing") {
    auto g = make_grid(16, 0.5);
    auto V = gridfield::potential_from_values(g, std::vector<double>(g.size(), 0.0));
    auto s = solve_lippmann_schwinger(V, make_incident({1, 0, 0}, 4.0));
    for (auto v : s.u_sc.values) CHECK(v == cdouble(0.0));
  }

  TEST_CASE("Born series and Krylov agree in the convergent regime") {
    auto V = bump_potential(16, 0.5, 40.0, 0.35);
    auto inc = make_incident({0, 0, 1}, 6.0);
    SolverOptions opt;
    opt.tol = 1e-12;
    auto kry = solve_lippmann_schwinger(V, inc, opt);
    CHECK(kry.report.relative_residual < 1e-10);
    auto born = born_solve(V, inc, 30, opt);
    CHECK(born.report.neumann_norm_estimate < 0.5);
    CHECK(rel_diff(born.u_sc.values, kry.u_sc.values) < 1e-9);
    for (std::size_t j = 1; j < born.term_norms.size(); ++j) CHECK(born.term_norms[j] < born.term_norms[j - 1]);
  }

  TEST_CASE("Born series refuses the divergent regime") {
    auto V = bump_potential(16, 0.5, 4000.0, 0.35);
    CHECK_THROWS_WITH_AS(born_solve(V, make_incident({0, 0, 1}, 2.0), 5), doctest::Contains("Born series refused"),
                         NumericalError);
  }

  TEST_CASE("far-field Born terms decompose the full far field") {
    auto V = bump_potential(16, 0.5, 200.0, 0.35);
    auto inc = make_incident({0, 0, 1}, 5.0);
    SolverOptions opt;
    opt.tol = 1e-12;
    auto t = born_far_terms(V, inc, {0, 0, -1}, opt);
    auto s = solve_lippmann_schwinger(V, inc, opt);
    auto u_inc = incident_field(V.grid, inc);
    for (std::size_t i = 0; i < u_inc.size(); ++i) s.u_sc.values[i] += u_inc[i];
    cdouble full = far_field(V, s.u_sc, {0, 0, -1}, 5.0);
    CHECK(std::abs(t.u0 + t.u1 + t.u2plus - full) < 1e-10 * std::abs(full));
    Born0Backscatter b0(V, {{0, 0, 1}});
    CHECK(std::abs(t.u0 - b0(0, 5.0)) < 1e-12 * std::abs(t.u0));
  }

  TEST_CASE("standard directions and frequency grids") {
    auto d = standard_directions(26);
    CHECK(d[0] == Vec3{1, 0, 0});
    CHECK(d[1] == Vec3{-1, 0, 0});
    for (std::size_t i = 0; i < d.size(); i += 2) {
      CHECK(norm(d[i]) == doctest::Approx(1.0));
      CHECK(norm(d[i] + d[i + 1]) < 1e-15);
    }
    for (auto v : standard_directions(40)) CHECK(norm(v) == doctest::Approx(1.0));
    auto f = frequency_grid(4.0, 5.0, 0.25);
    CHECK(f.size() == 5);
    CHECK(f.back() == doctest::Approx(5.0));
  }

  TEST_CASE("lattice Born-0 binning equals the direct sum") {
    auto V = bump_potential(16, 0.5, 1.0, 0.4);
    auto dirs = standard_directions(26);
    dirs.push_back({0.48, 0.6, 0.64});
    auto ds = born0_sweep(V, dirs, {3.0, 17.5, 40.0});
    for (std::size_t d = 0; d < dirs.size(); ++d)
      for (std::size_t f = 0; f < 3; ++f) {
        cdouble direct = kernels::born0_sum(V.grid, V.values, -dirs[d], dirs[d], ds.frequencies[f]);
        CHECK(std::abs(ds.at(d, f) - direct) < 1e-11 * std::abs(direct));
      }
    Born0Backscatter b0(V, dirs);
    cdouble s(6.0, -0.4);
    CHECK(std::abs(b0(3, s) - kernels::born0_sum(V.grid, V.values, -dirs[3], dirs[3], s)) < 1e-11 * std::abs(b0(3, s)));
  }

  TEST_CASE("backscatter sweep is thread-count independent and names the failing frequency") {
    auto V = bump_potential(16, 0.5, 40.0, 0.35);
    auto dirs = standard_directions(2);
    int saved = thread_count();
    set_thread_count(1);
    auto a = backscatter_sweep(V, dirs, {4.0, 5.0, 6.0});
    set_thread_count(3);
    auto b = backscatter_sweep(V, dirs, {4.0, 5.0, 6.0});
    set_thread_count(saved);
    CHECK(a.values == b.values);
    auto strong = bump_potential(16, 0.5, 8000.0, 0.35);
    CHECK_THROWS_WITH_AS(backscatter_sweep(strong, dirs, {1.0}), doctest::Contains("theta="), NumericalError);
    CHECK_THROWS_WITH_AS(backscatter_sweep(strong, dirs, {1.0}), doctest::Contains("k=1"), NumericalError);
  }
}
