#include "scatterlab/gmres.hpp"

#include <vector>

#include "scatterlab/fft.hpp"
#include "scatterlab/parallel.hpp"

namespace scatterlab {

cdouble inner(std::span<const cdouble> a, std::span<const cdouble> b) {
  return blocked_sum<cdouble>(a.size(), [&](std::size_t i) { return std::conj(a[i]) * b[i]; });
}

double norm2(std::span<const cdouble> a) {
  return std::sqrt(blocked_sum<double>(a.size(), [&](std::size_t i) { return std::norm(a[i]); }));
}

namespace {

void axpy(cdouble alpha, std::span<const cdouble> x, std::span<cdouble> y) {
  const auto n = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] += alpha * x[static_cast<std::size_t>(i)];
}

void residual(const LinearOperator& apply, std::span<const cdouble> b, std::span<const cdouble> x,
              std::span<cdouble> r) {
  apply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
}

}  // namespace

GmresResult gmres(const LinearOperator& apply, std::span<const cdouble> b, std::span<cdouble> x, int restart,
                  int max_iterations, double tol) {
  require(restart > 0 && max_iterations >= 0 && tol > 0.0, "gmres: invalid parameters");
  const std::size_t n = b.size();
  GmresResult result;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), cdouble(0.0));
    result.converged = true;
    return result;
  }

  std::vector<ComplexBuffer> basis(static_cast<std::size_t>(restart) + 1, ComplexBuffer(n));
  std::vector<std::vector<cdouble>> hess(static_cast<std::size_t>(restart) + 1,
                                         std::vector<cdouble>(static_cast<std::size_t>(restart)));
  std::vector<double> cs(static_cast<std::size_t>(restart));
  std::vector<cdouble> sn(static_cast<std::size_t>(restart)), g(static_cast<std::size_t>(restart) + 1);
  ComplexBuffer w(n);

  residual(apply, b, x, basis[0]);
  double rnorm = norm2(basis[0]);
  result.relative_residual = rnorm / bnorm;
  while (result.relative_residual > tol && result.iterations < max_iterations) {
    for (auto& v : basis[0]) v /= rnorm;
    std::fill(g.begin(), g.end(), cdouble(0.0));
    g[0] = rnorm;
    int j = 0;
    for (; j < restart && result.iterations < max_iterations; ++j) {
      auto ju = static_cast<std::size_t>(j);
      apply(basis[ju], w);
      for (int i = 0; i <= j; ++i) {
        auto iu = static_cast<std::size_t>(i);
        cdouble hij = inner(basis[iu], w);
        hess[iu][ju] = hij;
        axpy(-hij, basis[iu], w);
      }
      double hnext = norm2(w);
      hess[ju + 1][ju] = hnext;
      if (hnext > 0.0) {
        for (std::size_t t = 0; t < n; ++t) basis[ju + 1][t] = w[t] / hnext;
      }
      for (int i = 0; i < j; ++i) {
        auto iu = static_cast<std::size_t>(i);
        cdouble a = hess[iu][ju], c = hess[iu + 1][ju];
        hess[iu][ju] = cs[iu] * a + sn[iu] * c;
        hess[iu + 1][ju] = -std::conj(sn[iu]) * a + cs[iu] * c;
      }
      cdouble a = hess[ju][ju], c = hess[ju + 1][ju];
      double denom = std::sqrt(std::norm(a) + std::norm(c));
      if (denom == 0.0) {
        cs[ju] = 1.0;
        sn[ju] = 0.0;
      } else if (std::abs(a) == 0.0) {
        cs[ju] = 0.0;
        sn[ju] = std::conj(c) / std::abs(c);
      } else {
        cs[ju] = std::abs(a) / denom;
        sn[ju] = (a / std::abs(a)) * std::conj(c) / denom;
      }
      hess[ju][ju] = cs[ju] * a + sn[ju] * c;
      hess[ju + 1][ju] = 0.0;
      g[ju + 1] = -std::conj(sn[ju]) * g[ju];
      g[ju] = cs[ju] * g[ju];
      ++result.iterations;
      if (std::abs(g[ju + 1]) / bnorm <= tol || hnext == 0.0) {
        ++j;
        break;
      }
    }
    // back substitution for the j x j upper triangle
    std::vector<cdouble> y(static_cast<std::size_t>(j));
    for (int i = j - 1; i >= 0; --i) {
      auto iu = static_cast<std::size_t>(i);
      cdouble s = g[iu];
      for (int t = i + 1; t < j; ++t) s -= hess[iu][static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t)];
      y[iu] = s / hess[iu][iu];
    }
    for (int i = 0; i < j; ++i) axpy(y[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(i)], x);
    residual(apply, b, x, basis[0]);
    rnorm = norm2(basis[0]);
    result.relative_residual = rnorm / bnorm;
    if (rnorm == 0.0) break;
  }
  result.converged = result.relative_residual <= tol;
  return result;
}

}  // namespace scatterlab
