#pragma once

#include <span>
#include <string>
#include <vector>

#include "scatterlab/fft.hpp"
#include "scatterlab/gridfield.hpp"

namespace scatterlab::forward {

using gridfield::PotentialRealization;

struct FieldOnGrid {
  GridSpec3 grid;
  std::vector<cdouble> values;
};

struct IncidentWave {
  Vec3 direction;
  cdouble k;
};

IncidentWave make_incident(Vec3 direction, cdouble k);

/// u_inc(y) = exp(i k theta.y) on the grid.
std::vector<cdouble> incident_field(const GridSpec3& grid, const IncidentWave& inc);

/// How the discrete resolvent is built.
///   collocation: sampled truncated kernel with a ball-averaged self cell; equals the direct
///                O(N^2) sum to roundoff.
///   spectral:    continuous Fourier symbol of the truncated kernel sampled on the padded lattice.
enum class GreenScheme { collocation, spectral };

struct SolverOptions {
  double tol = 1e-8;
  int restart = 50;
  int max_iterations = 2000;
  double truncation = 0.0;  // 0 picks a truncation from the support of V
  GreenScheme scheme = GreenScheme::collocation;
  int power_iterations = 20;
  double regime_gate = 1.0;  // sweeps refuse k with neumann estimate >= gate
};

struct SolveReport {
  enum class Method { krylov, born } method = Method::krylov;
  int iterations = 0;
  double relative_residual = 0.0;
  double neumann_norm_estimate = 0.0;
};

/// Continuous Fourier transform at |xi| = rho of 1_{|z| <= L} exp(ik|z|)/(4 pi |z|):
/// (1/rho) int_0^L exp(ikr) sin(rho r) dr, and int_0^L r exp(ikr) dr at rho = 0.
cdouble truncated_green_symbol_value(double rho, cdouble k, double L_trunc);

/// The symbol above on the padded (2n)^3 frequency lattice, spacing pi/(2 L_box), FFT ordering.
ComplexBuffer truncated_green_symbol(const GridSpec3& grid, cdouble k, double L_trunc);

/// Discrete R_0(k) on one grid: zero padding to (2n)^3 and a cyclic convolution with a
/// precomputed symbol. Immutable after construction; apply() may be called concurrently.
class FreeResolvent {
 public:
  FreeResolvent(const GridSpec3& grid, cdouble k, double L_trunc, GreenScheme scheme = GreenScheme::collocation);
  void apply(std::span<const cdouble> f, std::span<cdouble> out) const;
  std::vector<cdouble> apply(std::span<const cdouble> f) const;
  const GridSpec3& grid() const { return grid_; }
  cdouble k() const { return k_; }
  double truncation() const { return L_trunc_; }

 private:
  GridSpec3 grid_;
  cdouble k_;
  double L_trunc_;
  ComplexFft3 fft_;
  ComplexBuffer symbol_;
};

/// Truncation covering every difference of two support points, capped at the padding limit 2 L_box.
double default_truncation(const GridSpec3& grid, std::span<const double> V);

FieldOnGrid apply_free_resolvent(const FieldOnGrid& f, cdouble k, double L_trunc,
                                 GreenScheme scheme = GreenScheme::collocation);

/// Power-iteration estimate of the growth factor of f -> R_0(V f).
double neumann_norm_estimate(const FreeResolvent& r0, std::span<const double> V, int iterations,
                             std::uint64_t seed = 0x5eed);

struct SolveResult {
  FieldOnGrid u_sc;
  SolveReport report;
};

/// Krylov solve of u_sc = R_0(V (u_inc + u_sc)). Throws NumericalError on non-convergence.
SolveResult solve_lippmann_schwinger(const PotentialRealization& V, const IncidentWave& inc,
                                     const SolverOptions& options = {});
SolveResult solve_lippmann_schwinger(const PotentialRealization& V, const IncidentWave& inc,
                                     const FreeResolvent& r0, const SolverOptions& options = {});

/// Same solve without the real-frequency precondition; used for the complex-frequency probes.
SolveResult solve_at_complex_frequency(const PotentialRealization& V, const IncidentWave& inc,
                                       const FreeResolvent& r0, const SolverOptions& options = {});

struct BornSolution {
  FieldOnGrid u_sc;
  SolveReport report;
  std::vector<double> term_norms;  // norm of each added term R_0 (V R_0)^j (V u_inc)
};

/// Partial Born sum with n_terms + 1 terms. Refuses (NumericalError) when the estimate is >= 1.
BornSolution born_solve(const PotentialRealization& V, const IncidentWave& inc, int n_terms,
                        const SolverOptions& options = {});
BornSolution born_solve(const PotentialRealization& V, const IncidentWave& inc, int n_terms,
                        const FreeResolvent& r0, const SolverOptions& options = {});

/// (1/4pi) sum_y exp(-ik x_hat.y) V(y) u_total(y) dV.
cdouble far_field(const PotentialRealization& V, const FieldOnGrid& u_total, Vec3 x_hat, cdouble k);

struct BornFarTerms {
  cdouble u0, u1, u2plus;
  SolveReport report;
};

BornFarTerms born_far_terms(const PotentialRealization& V, const IncidentWave& inc, Vec3 x_hat,
                            const SolverOptions& options = {});
BornFarTerms born_far_terms(const PotentialRealization& V, const IncidentWave& inc, Vec3 x_hat,
                            const FreeResolvent& r0, const SolverOptions& options = {});

}  // namespace scatterlab::forward
