#include "scatterlab/forward.hpp"

#include <algorithm>
#include <sstream>

#include "scatterlab/gmres.hpp"
#include "scatterlab/kernels.hpp"
#include "scatterlab/parallel.hpp"
#include "scatterlab/reference.hpp"
#include "scatterlab/rng.hpp"

namespace scatterlab::forward {
namespace {

const cdouble I(0.0, 1.0);

// int_0^L exp(i a r) dr
cdouble segment_exp(cdouble a, double L) {
  cdouble z = I * a * L;
  if (std::abs(z) < 0.1) {
    cdouble term = 1.0, sum = 0.0;
    for (int j = 0; j < 14; ++j) {
      term /= double(j + 1);
      sum += term;
      term *= z;
    }
    return L * sum;
  }
  return (std::exp(z) - 1.0) / (I * a);
}

// int_0^L r exp(i k r) dr
cdouble ramp_exp(cdouble k, double L) {
  cdouble z = I * k * L;
  if (std::abs(z) < 0.1) {
    cdouble term = 1.0, sum = 0.0;
    for (int j = 0; j < 14; ++j) {
      sum += term / double(j + 2);
      term *= z / double(j + 1);
    }
    return L * L * sum;
  }
  return (std::exp(z) * (1.0 - z) - 1.0) / (k * k);
}

std::vector<cdouble> times_potential(std::span<const double> V, std::span<const cdouble> u) {
  std::vector<cdouble> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = V[i] * u[i];
  return out;
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::string describe_k(cdouble k) {
  std::ostringstream os;
  os.precision(10);
  if (k.imag() == 0.0) {
    os << k.real();
  } else {
    os << k.real() << (k.imag() < 0 ? "-" : "+") << std::abs(k.imag()) << "i";
  }
  return os.str();
}

}  // namespace

IncidentWave make_incident(Vec3 direction, cdouble k) {
  require(std::abs(norm(direction) - 1.0) <= 1e-12, "incident direction must be a unit vector");
  require(std::abs(k) > 0.0, "frequency must be nonzero");
  return {direction, k};
}

std::vector<cdouble> incident_field(const GridSpec3& grid, const IncidentWave& inc) {
  const int n = grid.n_per_axis;
  std::vector<cdouble> ex(static_cast<std::size_t>(n)), ey(ex.size()), ez(ex.size());
  for (int i = 0; i < n; ++i) {
    double x = grid.coord(i);
    ex[static_cast<std::size_t>(i)] = std::exp(I * inc.k * inc.direction.x * x);
    ey[static_cast<std::size_t>(i)] = std::exp(I * inc.k * inc.direction.y * x);
    ez[static_cast<std::size_t>(i)] = std::exp(I * inc.k * inc.direction.z * x);
  }
  std::vector<cdouble> u(grid.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        u[grid.index(i, j, l)] =
            ex[static_cast<std::size_t>(i)] * ey[static_cast<std::size_t>(j)] * ez[static_cast<std::size_t>(l)];
  return u;
}

cdouble truncated_green_symbol_value(double rho, cdouble k, double L_trunc) {
  require(L_trunc > 0.0, "truncation length must be positive");
  if (rho == 0.0) return ramp_exp(k, L_trunc);
  return (segment_exp(k + rho, L_trunc) - segment_exp(k - rho, L_trunc)) / (2.0 * I * rho);
}

ComplexBuffer truncated_green_symbol(const GridSpec3& grid, cdouble k, double L_trunc) {
  require(L_trunc > 0.0 && L_trunc <= 2.0 * grid.box_half_width * (1.0 + 1e-12),
          "truncation length exceeds the padded-period safety margin 2 L_box");
  const int np = 2 * grid.n_per_axis;
  const double dxi = pi / (2.0 * grid.box_half_width);
  std::vector<double> f2(static_cast<std::size_t>(np));
  for (int a = 0; a < np; ++a) {
    double xi = dxi * (a < np / 2 ? a : a - np);
    f2[static_cast<std::size_t>(a)] = xi * xi;
  }
  ComplexBuffer s(static_cast<std::size_t>(np) * np * np);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b)
      for (int c = 0; c < np; ++c) {
        double rho = std::sqrt(f2[static_cast<std::size_t>(a)] + f2[static_cast<std::size_t>(b)] +
                               f2[static_cast<std::size_t>(c)]);
        s[(static_cast<std::size_t>(a) * np + static_cast<std::size_t>(b)) * np + static_cast<std::size_t>(c)] =
            truncated_green_symbol_value(rho, k, L_trunc);
      }
  return s;
}

FreeResolvent::FreeResolvent(const GridSpec3& grid, cdouble k, double L_trunc, GreenScheme scheme)
    : grid_(grid), k_(k), L_trunc_(L_trunc), fft_(2 * grid.n_per_axis) {
  require(std::abs(k) > 0.0, "frequency must be nonzero");
  require(L_trunc > 0.0 && L_trunc <= 2.0 * grid.box_half_width * (1.0 + 1e-12),
          "truncation length exceeds the padded-period safety margin 2 L_box");
  const int np = 2 * grid.n_per_axis;
  const double inv_total = 1.0 / (static_cast<double>(np) * np * np);
  if (scheme == GreenScheme::spectral) {
    symbol_ = truncated_green_symbol(grid, k, L_trunc);
    kernels::scale(symbol_, inv_total);
    return;
  }
  const double h = grid.spacing;
  const double dv = grid.cell_volume;
  const cdouble self = reference::self_cell_integral(k, dv);
  symbol_.assign(static_cast<std::size_t>(np) * np * np, cdouble(0.0));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int a = 0; a < np; ++a) {
    double x = h * (a < np / 2 ? a : a - np);
    for (int b = 0; b < np; ++b) {
      double y = h * (b < np / 2 ? b : b - np);
      for (int c = 0; c < np; ++c) {
        double z = h * (c < np / 2 ? c : c - np);
        double r = std::sqrt(x * x + y * y + z * z);
        cdouble value = 0.0;
        if (r == 0.0) {
          value = self;
        } else if (r <= L_trunc) {
          value = std::exp(I * k * r) / (4.0 * pi * r) * dv;
        }
        symbol_[(static_cast<std::size_t>(a) * np + static_cast<std::size_t>(b)) * np + static_cast<std::size_t>(c)] =
            value * inv_total;
      }
    }
  }
  fft_.forward(symbol_.data(), symbol_.data());
}

void FreeResolvent::apply(std::span<const cdouble> f, std::span<cdouble> out) const {
  require(f.size() == grid_.size() && out.size() == grid_.size(), "free resolvent: field size mismatch");
  const int n = grid_.n_per_axis;
  const int np = 2 * n;
  ComplexBuffer pad(static_cast<std::size_t>(np) * np * np, cdouble(0.0));
  auto padded = [np](int i, int j, int l) {
    return (static_cast<std::size_t>(i) * np + static_cast<std::size_t>(j)) * np + static_cast<std::size_t>(l);
  };
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) pad[padded(i, j, l)] = f[grid_.index(i, j, l)];
  fft_.forward(pad.data(), pad.data());
  kernels::multiply(pad, symbol_);
  fft_.backward(pad.data(), pad.data());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) out[grid_.index(i, j, l)] = pad[padded(i, j, l)];
}

std::vector<cdouble> FreeResolvent::apply(std::span<const cdouble> f) const {
  std::vector<cdouble> out(f.size());
  apply(f, out);
  return out;
}

double default_truncation(const GridSpec3& grid, std::span<const double> V) {
  double radius = gridfield::support_radius(grid, V);
  return std::min(2.0 * grid.box_half_width, 2.0 * radius + 2.0 * grid.spacing);
}

FieldOnGrid apply_free_resolvent(const FieldOnGrid& f, cdouble k, double L_trunc, GreenScheme scheme) {
  FreeResolvent r0(f.grid, k, L_trunc, scheme);
  return {f.grid, r0.apply(f.values)};
}

double neumann_norm_estimate(const FreeResolvent& r0, std::span<const double> V, int iterations, std::uint64_t seed) {
  if (iterations <= 0 || all_zero(V)) return 0.0;
  const std::size_t n = V.size();
  std::vector<cdouble> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = rng::normal_pair(seed, rng::kPowerIteration, i);
    v[i] = {p[0], p[1]};
  }
  double vn = norm2(v);
  for (auto& x : v) x /= vn;
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    auto vv = times_potential(V, v);
    r0.apply(vv, w);
    double wn = norm2(w);
    estimate = wn;  // v has unit norm
    if (wn == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  return estimate;
}

SolveResult solve_lippmann_schwinger(const PotentialRealization& V, const IncidentWave& inc,
                                     const SolverOptions& options) {
  double L = options.truncation > 0.0 ? options.truncation : default_truncation(V.grid, V.values);
  FreeResolvent r0(V.grid, inc.k, L, options.scheme);
  return solve_lippmann_schwinger(V, inc, r0, options);
}

SolveResult solve_lippmann_schwinger(const PotentialRealization& V, const IncidentWave& inc,
                                     const FreeResolvent& r0, const SolverOptions& options) {
  require(inc.k.imag() == 0.0 && inc.k.real() > 0.0, "solve_lippmann_schwinger needs real k > 0");
  return solve_at_complex_frequency(V, inc, r0, options);
}

SolveResult solve_at_complex_frequency(const PotentialRealization& V, const IncidentWave& inc,
                                       const FreeResolvent& r0, const SolverOptions& options) {
  require(std::abs(r0.k() - inc.k) == 0.0, "resolvent frequency differs from the incident frequency");
  SolveResult result;
  result.u_sc.grid = V.grid;
  result.u_sc.values.assign(V.grid.size(), cdouble(0.0));
  result.report.method = SolveReport::Method::krylov;
  if (all_zero(V.values)) return result;

  auto u_inc = incident_field(V.grid, inc);
  auto b = r0.apply(times_potential(V.values, u_inc));
  LinearOperator op = [&](std::span<const cdouble> x, std::span<cdouble> y) {
    auto vx = times_potential(V.values, x);
    r0.apply(vx, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] - y[i];
  };
  auto g = gmres(op, b, result.u_sc.values, options.restart, options.max_iterations, options.tol);
  result.report.iterations = g.iterations;
  result.report.neumann_norm_estimate = neumann_norm_estimate(r0, V.values, options.power_iterations);
  if (!g.converged) {
    std::ostringstream os;
    os << "Krylov solve did not converge at k=" << describe_k(inc.k) << " (relative residual "
       << g.relative_residual << " after " << g.iterations << " iterations, neumann estimate "
       << result.report.neumann_norm_estimate << ")";
    throw NumericalError(os.str());
  }
  // residual contract, evaluated afresh rather than taken from the Krylov recurrence
  std::vector<cdouble> total(u_inc.size());
  for (std::size_t i = 0; i < total.size(); ++i) total[i] = u_inc[i] + result.u_sc.values[i];
  auto back = r0.apply(times_potential(V.values, total));
  for (std::size_t i = 0; i < back.size(); ++i) back[i] = result.u_sc.values[i] - back[i];
  result.report.relative_residual = norm2(back) / norm2(b);
  return result;
}

BornSolution born_solve(const PotentialRealization& V, const IncidentWave& inc, int n_terms,
                        const SolverOptions& options) {
  double L = options.truncation > 0.0 ? options.truncation : default_truncation(V.grid, V.values);
  FreeResolvent r0(V.grid, inc.k, L, options.scheme);
  return born_solve(V, inc, n_terms, r0, options);
}

BornSolution born_solve(const PotentialRealization& V, const IncidentWave& inc, int n_terms,
                        const FreeResolvent& r0, const SolverOptions& options) {
  require(n_terms >= 0, "born_solve: n_terms must be nonnegative");
  BornSolution out;
  out.u_sc.grid = V.grid;
  out.report.method = SolveReport::Method::born;
  out.report.neumann_norm_estimate = neumann_norm_estimate(r0, V.values, std::max(1, options.power_iterations));
  if (out.report.neumann_norm_estimate >= 1.0) {
    std::ostringstream os;
    os << "Born series refused at k=" << describe_k(inc.k) << ": neumann estimate "
       << out.report.neumann_norm_estimate << " >= 1 (divergent regime)";
    throw NumericalError(os.str());
  }
  auto u_inc = incident_field(V.grid, inc);
  auto term = r0.apply(times_potential(V.values, u_inc));
  out.u_sc.values = term;
  out.term_norms.push_back(norm2(term));
  for (int j = 1; j <= n_terms; ++j) {
    term = r0.apply(times_potential(V.values, term));
    for (std::size_t i = 0; i < term.size(); ++i) out.u_sc.values[i] += term[i];
    out.term_norms.push_back(norm2(term));
  }
  out.report.iterations = n_terms;
  return out;
}

cdouble far_field(const PotentialRealization& V, const FieldOnGrid& u_total, Vec3 x_hat, cdouble k) {
  require(u_total.grid == V.grid, "far_field: grid mismatch");
  return kernels::far_field_sum(V.grid, V.values, u_total.values, x_hat, k);
}

BornFarTerms born_far_terms(const PotentialRealization& V, const IncidentWave& inc, Vec3 x_hat,
                            const SolverOptions& options) {
  double L = options.truncation > 0.0 ? options.truncation : default_truncation(V.grid, V.values);
  FreeResolvent r0(V.grid, inc.k, L, options.scheme);
  return born_far_terms(V, inc, x_hat, r0, options);
}

BornFarTerms born_far_terms(const PotentialRealization& V, const IncidentWave& inc, Vec3 x_hat,
                            const FreeResolvent& r0, const SolverOptions& options) {
  BornFarTerms t{};
  if (all_zero(V.values)) return t;
  auto u_inc = incident_field(V.grid, inc);
  auto first = r0.apply(times_potential(V.values, u_inc));
  auto solved = solve_lippmann_schwinger(V, inc, r0, options);
  std::vector<cdouble> total(u_inc.size());
  for (std::size_t i = 0; i < total.size(); ++i) total[i] = u_inc[i] + solved.u_sc.values[i];
  t.u0 = kernels::far_field_sum(V.grid, V.values, u_inc, x_hat, inc.k);
  t.u1 = kernels::far_field_sum(V.grid, V.values, first, x_hat, inc.k);
  cdouble full = kernels::far_field_sum(V.grid, V.values, total, x_hat, inc.k);
  t.u2plus = full - t.u0 - t.u1;
  t.report = solved.report;
  return t;
}

}  // namespace scatterlab::forward
