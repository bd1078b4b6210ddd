#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <new>
#include <vector>

#include "scatterlab/common.hpp"

namespace scatterlab {

/// Allocator routing through fftw_malloc so every buffer has the alignment the plans assume.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<cdouble, FftwAllocator<cdouble>>;

/// Complex n^3 transform. Plans are shared, created once per size under a lock, and executed
/// through the new-array interface, so concurrent calls on distinct buffers are safe.
class ComplexFft3 {
 public:
  explicit ComplexFft3(int n);
  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  /// Unnormalized forward (e^{-i}) transform, in place allowed.
  void forward(const cdouble* in, cdouble* out) const;
  /// Unnormalized backward (e^{+i}) transform, in place allowed.
  void backward(const cdouble* in, cdouble* out) const;

 private:
  int n_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
  fftw_plan fwd_inplace_ = nullptr, bwd_inplace_ = nullptr;
};

/// Real n^3 transform with n*n*(n/2+1) half spectrum.
class RealFft3 {
 public:
  explicit RealFft3(int n);
  int n() const { return n_; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  std::size_t spectrum_size() const { return static_cast<std::size_t>(n_) * n_ * (n_ / 2 + 1); }
  void forward(const double* in, cdouble* out) const;
  /// Destroys `in`, as FFTW does for multi-dimensional c2r.
  void backward(cdouble* in, double* out) const;

 private:
  int n_;
  fftw_plan r2c_ = nullptr, c2r_ = nullptr;
};

}  // namespace scatterlab
