#pragma once

// Serial, unoptimized versions of the numerical kernels. Slow on purpose: one loop, one
// std::exp per term, no FFT. They exist to check the fast paths.

#include <cstdint>
#include <span>
#include <vector>

#include "scatterlab/grid.hpp"

namespace scatterlab::reference {

void white_noise(const GridSpec3& grid, std::uint64_t seed, std::span<double> out);

cdouble far_field_sum(const GridSpec3& grid, std::span<const double> weight, std::span<const cdouble> field,
                      Vec3 direction, cdouble k);

/// Outgoing kernel exp(ik r)/(4 pi r).
cdouble outgoing_kernel(cdouble k, double r);

/// Integral of the outgoing kernel over the ball of volume cell_volume centred at the origin.
cdouble self_cell_integral(cdouble k, double cell_volume);

/// O(N^2) collocation sum: out(x) = sum_{y != x, |x-y| <= L_trunc} Phi_k(x-y) f(y) dV + self(x) f(x).
std::vector<cdouble> direct_resolvent(const GridSpec3& grid, std::span<const cdouble> f, cdouble k, double L_trunc);

/// Periodic lattice covariance (1/Vol) sum_{xi != 0} |xi|^{-m} exp(i xi.z) by brute force.
double lattice_covariance(const GridSpec3& grid, double m, Vec3 z);

}  // namespace scatterlab::reference
