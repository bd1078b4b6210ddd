#include "scatterlab/specband.hpp"

#include <algorithm>

#include "scatterlab/gmres.hpp"
#include "scatterlab/kernels.hpp"
#include "scatterlab/parallel.hpp"
#include "scatterlab/rng.hpp"

namespace scatterlab::specband {

double resolvent_norm_estimate(cdouble k, const GridSpec3& grid, double L_trunc, double chi_radius, int iterations,
                               std::uint64_t seed) {
  require(std::abs(k) > 0.0, "resolvent_norm_estimate: k must be nonzero");
  require(iterations > 0, "resolvent_norm_estimate: need at least one iteration");
  const double radius = chi_radius > 0.0 ? chi_radius : 0.5 * L_trunc;
  forward::FreeResolvent r0(grid, k, L_trunc);
  const std::size_t n = grid.size();
  std::vector<char> chi(n);
  for (std::size_t i = 0; i < n; ++i) chi[i] = norm(grid.node(i)) <= radius;

  auto apply_a = [&](std::span<const cdouble> in, std::span<cdouble> out) {
    std::vector<cdouble> masked(n);
    for (std::size_t i = 0; i < n; ++i) masked[i] = chi[i] ? in[i] : cdouble(0.0);
    r0.apply(masked, out);
    for (std::size_t i = 0; i < n; ++i)
      if (!chi[i]) out[i] = 0.0;
  };
  auto apply_adjoint = [&](std::span<const cdouble> in, std::span<cdouble> out) {
    std::vector<cdouble> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::conj(in[i]);
    apply_a(c, out);
    for (auto& x : out) x = std::conj(x);
  };

  std::vector<cdouble> v(n), w(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = rng::normal_pair(seed, rng::kPowerIteration, i);
    v[i] = chi[i] ? cdouble(p[0], p[1]) : cdouble(0.0);
  }
  double vn = norm2(v);
  if (vn == 0.0) return 0.0;
  for (auto& x : v) x /= vn;
  for (int it = 0; it < iterations; ++it) {
    apply_a(v, w);
    apply_adjoint(w, z);
    double zn = norm2(z);
    if (zn == 0.0) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = z[i] / zn;
  }
  apply_a(v, w);
  return norm2(w);
}

ResolventProbe probe_resolvent(const std::vector<cdouble>& lambdas, const GridSpec3& grid, double L_trunc,
                               double chi_radius, int iterations) {
  ResolventProbe probe;
  probe.lambda_grid = lambdas;
  probe.cutoff_diam = L_trunc;
  probe.norms.resize(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require(std::abs(lambdas[i]) > 0.0, "lambda grid must avoid 0");
    probe.norms[i] = resolvent_norm_estimate(lambdas[i], grid, L_trunc, chi_radius, iterations);
  }
  auto shape = [&](cdouble l) {
    return std::exp(L_trunc * std::max(0.0, -l.imag())) / (1.0 + std::abs(l));
  };
  if (!lambdas.empty()) {
    double c = probe.norms[0] / shape(lambdas[0]);
    for (auto l : lambdas) probe.bound_shape.push_back(c * shape(l));
  }
  return probe;
}

double neumann_threshold(const gridfield::PotentialRealization& V, const std::vector<double>& k_grid,
                         const forward::SolverOptions& options) {
  require(std::is_sorted(k_grid.begin(), k_grid.end()), "neumann_threshold: k-grid must be ascending");
  const double L = options.truncation > 0.0 ? options.truncation : forward::default_truncation(V.grid, V.values);
  for (double k : k_grid) {
    forward::FreeResolvent r0(V.grid, k, L, options.scheme);
    if (forward::neumann_norm_estimate(r0, V.values, options.power_iterations) <= 0.5) return k;
  }
  return kNoThreshold;
}

double mu_lower_bound(const SlabParams& slab, double z) {
  require(slab.K0 > 0.0 && slab.K > slab.K0 && slab.h0 > 0.0, "slab needs 0 < K0 < K and h0 > 0");
  require(z > slab.K, "mu_lower_bound is defined for z > K");
  const double a = slab.a(), h0 = slab.h0;
  return 64.0 * a * h0 / (3.0 * pi * pi * (a * a + 4.0 * h0 * h0)) * std::exp(pi / (2.0 * h0) * (0.5 * a - z));
}

cdouble ComplexFarFieldTable::at(std::size_t direction, cdouble k) const {
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    if (std::abs(frequencies[f] - k) <= 1e-12 * std::max(1.0, std::abs(k))) {
      return values[direction * frequencies.size() + f];
    }
  }
  throw PreconditionError("missing complex-frequency coverage for k=(" + std::to_string(k.real()) + "," +
                          std::to_string(k.imag()) + ")");
}

std::vector<cdouble> epsilon_band_frequencies(cdouble k, double tau, int n_t) {
  require(n_t >= 2, "need at least two t nodes");
  std::vector<cdouble> out;
  for (int i = 0; i < n_t; ++i) {
    double t = 1.0 + double(i) / double(n_t - 1);
    cdouble s = k * t;
    for (cdouble f : {s, -s, s + tau, -(s + tau)}) out.push_back(f);
  }
  return out;
}

ComplexFarFieldTable born0_complex_table(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                         const std::vector<cdouble>& frequencies) {
  ComplexFarFieldTable t{directions, frequencies, std::vector<cdouble>(directions.size() * frequencies.size())};
  Born0Backscatter b0(V, directions);
  for (std::size_t d = 0; d < directions.size(); ++d)
    for (std::size_t f = 0; f < frequencies.size(); ++f) t.values[d * frequencies.size() + f] = b0(d, frequencies[f]);
  return t;
}

ComplexFarFieldTable full_complex_table(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                        const std::vector<cdouble>& frequencies,
                                        const forward::SolverOptions& options) {
  ComplexFarFieldTable t{directions, frequencies, std::vector<cdouble>(directions.size() * frequencies.size())};
  const double L = options.truncation > 0.0 ? options.truncation : forward::default_truncation(V.grid, V.values);
  const auto nf = static_cast<int>(frequencies.size());
  std::vector<std::string> errors(frequencies.size());
  forward::SolverOptions inner = options;
  inner.power_iterations = 0;
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (int f = 0; f < nf; ++f) {
    auto fu = static_cast<std::size_t>(f);
    try {
      forward::FreeResolvent r0(V.grid, frequencies[fu], L, options.scheme);
      for (std::size_t d = 0; d < directions.size(); ++d) {
        auto inc = forward::make_incident(directions[d], frequencies[fu]);
        auto sol = forward::solve_at_complex_frequency(V, inc, r0, inner);
        auto u_inc = forward::incident_field(V.grid, inc);
        for (std::size_t i = 0; i < u_inc.size(); ++i) sol.u_sc.values[i] += u_inc[i];
        t.values[d * frequencies.size() + fu] = forward::far_field(V, sol.u_sc, -directions[d], frequencies[fu]);
      }
    } catch (const std::exception& e) {
      errors[fu] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError("complex-frequency table failed: " + e);
  return t;
}

cdouble epsilon_band_complex(const ComplexFarFieldTable& first, const ComplexFarFieldTable& second, cdouble k,
                             double tau, double m, int n_t) {
  require(first.directions.size() == second.directions.size() && !first.directions.empty(),
          "epsilon_band_complex: direction sets differ");
  const std::size_t nd = first.directions.size();
  const double weight = 4.0 * pi / double(nd);
  cdouble integral = 0.0;
  for (int i = 0; i < n_t; ++i) {
    double t = 1.0 + double(i) / double(n_t - 1);
    cdouble s = k * t;
    cdouble sphere = 0.0;
    for (std::size_t d = 0; d < nd; ++d) {
      cdouble u1 = first.at(d, -(s + tau)) * first.at(d, s) - second.at(d, -(s + tau)) * second.at(d, s);
      cdouble u2 = first.at(d, s + tau) * first.at(d, -s) - second.at(d, s + tau) * second.at(d, -s);
      sphere += weight * u1 * u2;
    }
    double w = (i == 0 || i == n_t - 1) ? 0.5 : 1.0;
    integral += w * std::pow(t, 2.0 * m) * sphere;
  }
  integral /= double(n_t - 1);
  return std::pow(k, 2.0 * m) * integral;
}

}  // namespace scatterlab::specband
