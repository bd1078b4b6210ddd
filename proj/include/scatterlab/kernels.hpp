#pragma once

// OpenMP kernels shared by the modules. Each has a serial counterpart in reference.hpp
// used by the tests and the benchmark.

#include <cstdint>
#include <span>

#include "scatterlab/grid.hpp"

namespace scatterlab::kernels {

/// Standard normal times 1/sqrt(cell_volume) at every node, drawn from the node's own counter.
void white_noise(const GridSpec3& grid, std::uint64_t seed, std::span<double> out);

/// a[i] *= b[i].
void multiply(std::span<cdouble> a, std::span<const cdouble> b);

/// a[i] *= s.
void scale(std::span<cdouble> a, double s);

/// (1/4pi) * sum_y exp(-i k d.y) weight(y) field(y) * cell_volume, with separable phase tables.
cdouble far_field_sum(const GridSpec3& grid, std::span<const double> weight, std::span<const cdouble> field,
                      Vec3 direction, cdouble k);

/// Same sum with field(y) = exp(i k theta.y); the Born-0 term for arbitrary directions.
cdouble born0_sum(const GridSpec3& grid, std::span<const double> weight, Vec3 x_hat, Vec3 theta, cdouble k);

}  // namespace scatterlab::kernels
