#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "scatterlab/backscatter.hpp"
#include "scatterlab/forward.hpp"

namespace scatterlab::specband {

/// Largest singular value of chi R_0(k) chi on the grid, chi the indicator of |x| <= chi_radius
/// (default L_trunc / 2), by power iteration on A*A. A is complex symmetric, so A* f = conj(A conj f).
double resolvent_norm_estimate(cdouble k, const GridSpec3& grid, double L_trunc, double chi_radius = 0.0,
                               int iterations = 30, std::uint64_t seed = 0x5eed);

struct ResolventProbe {
  std::vector<cdouble> lambda_grid;
  std::vector<double> norms;
  std::vector<double> bound_shape;  // (1+|lambda|)^{-1} exp(L (Im lambda)_-), scaled to match the first norm
  double cutoff_diam = 0.0;
};

ResolventProbe probe_resolvent(const std::vector<cdouble>& lambdas, const GridSpec3& grid, double L_trunc,
                               double chi_radius = 0.0, int iterations = 30);

inline constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

/// Smallest k on the ascending grid whose Neumann estimate is <= 1/2, or +infinity.
double neumann_threshold(const gridfield::PotentialRealization& V, const std::vector<double>& k_grid,
                         const forward::SolverOptions& options = {});

struct SlabParams {
  double K0 = 0.0;
  double K = 0.0;
  double h0 = 0.5;
  double a() const { return K - K0; }
};

/// 64 a h0 / (3 pi^2 (a^2 + 4 h0^2)) * exp((pi / (2 h0)) (a/2 - z)), for z > K.
double mu_lower_bound(const SlabParams& slab, double z);

/// Backscatter amplitudes at complex frequencies, direction-major like FarFieldDataset.
struct ComplexFarFieldTable {
  std::vector<Vec3> directions;
  std::vector<cdouble> frequencies;
  std::vector<cdouble> values;

  /// Value at an exactly tabulated frequency; throws PreconditionError when it is missing.
  cdouble at(std::size_t direction, cdouble k) const;
};

/// Frequencies needed by epsilon_band_complex: +-kt and +-(kt + tau) on n_t trapezoid nodes in t.
std::vector<cdouble> epsilon_band_frequencies(cdouble k, double tau, int n_t);

ComplexFarFieldTable born0_complex_table(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                         const std::vector<cdouble>& frequencies);

/// Full-model table; every frequency gets its own resolvent and Krylov solves.
ComplexFarFieldTable full_complex_table(const gridfield::PotentialRealization& V, const std::vector<Vec3>& directions,
                                        const std::vector<cdouble>& frequencies,
                                        const forward::SolverOptions& options = {});

/// eps^2(k, tau) = k^{2m} int_1^2 t^{2m} sum_theta w_theta U1(t) U2(t) dt with
///   U1 = u1(-(kt+tau)) u1(kt) - u2(-(kt+tau)) u2(kt),  U2 = u1(kt+tau) u1(-kt) - u2(kt+tau) u2(-kt),
/// equal weights 4 pi / n_dir and trapezoid nodes in t.
cdouble epsilon_band_complex(const ComplexFarFieldTable& first, const ComplexFarFieldTable& second, cdouble k,
                             double tau, double m, int n_t = 33);

}  // namespace scatterlab::specband
