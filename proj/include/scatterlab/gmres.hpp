#pragma once

#include <functional>
#include <span>

#include "scatterlab/common.hpp"

namespace scatterlab {

using LinearOperator = std::function<void(std::span<const cdouble> in, std::span<cdouble> out)>;

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations. `x` holds the initial
/// guess on entry. Inner products use fixed-order blocked sums.
GmresResult gmres(const LinearOperator& apply, std::span<const cdouble> b, std::span<cdouble> x, int restart,
                  int max_iterations, double tol);

cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b);  // sum conj(a) b
double norm2(std::span<const cdouble> a);

}  // namespace scatterlab
