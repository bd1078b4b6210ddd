#include "scatterlab/fft.hpp"

#include <map>
#include <mutex>

namespace scatterlab {
namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct ComplexPlans {
  fftw_plan fwd, bwd, fwd_inplace, bwd_inplace;
};
struct RealPlans {
  fftw_plan r2c, c2r;
};

// Plans live for the whole process; FFTW plans are immutable once created.
ComplexPlans complex_plans(int n) {
  static std::map<int, ComplexPlans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::size_t size = static_cast<std::size_t>(n) * n * n;
  auto* a = fftw_alloc_complex(size);
  auto* b = fftw_alloc_complex(size);
  ComplexPlans p{};
  p.fwd = fftw_plan_dft_3d(n, n, n, a, b, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_3d(n, n, n, a, b, FFTW_BACKWARD, FFTW_ESTIMATE);
  p.fwd_inplace = fftw_plan_dft_3d(n, n, n, a, a, FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd_inplace = fftw_plan_dft_3d(n, n, n, a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(a);
  fftw_free(b);
  if (!p.fwd || !p.bwd || !p.fwd_inplace || !p.bwd_inplace) throw Error("FFTW planning failed");
  cache.emplace(n, p);
  return p;
}

RealPlans real_plans(int n) {
  static std::map<int, RealPlans> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::size_t size = static_cast<std::size_t>(n) * n * n;
  std::size_t half = static_cast<std::size_t>(n) * n * (n / 2 + 1);
  auto* r = fftw_alloc_real(size);
  auto* c = fftw_alloc_complex(half);
  RealPlans p{};
  p.r2c = fftw_plan_dft_r2c_3d(n, n, n, r, c, FFTW_ESTIMATE);
  p.c2r = fftw_plan_dft_c2r_3d(n, n, n, c, r, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  if (!p.r2c || !p.c2r) throw Error("FFTW planning failed");
  cache.emplace(n, p);
  return p;
}

fftw_complex* as_fftw(cdouble* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const cdouble* p) { return reinterpret_cast<fftw_complex*>(const_cast<cdouble*>(p)); }

}  // namespace

ComplexFft3::ComplexFft3(int n) : n_(n) {
  require(n > 0, "FFT size must be positive");
  auto p = complex_plans(n);
  fwd_ = p.fwd;
  bwd_ = p.bwd;
  fwd_inplace_ = p.fwd_inplace;
  bwd_inplace_ = p.bwd_inplace;
}

void ComplexFft3::forward(const cdouble* in, cdouble* out) const {
  fftw_execute_dft(in == out ? fwd_inplace_ : fwd_, as_fftw(in), as_fftw(out));
}

void ComplexFft3::backward(const cdouble* in, cdouble* out) const {
  fftw_execute_dft(in == out ? bwd_inplace_ : bwd_, as_fftw(in), as_fftw(out));
}

RealFft3::RealFft3(int n) : n_(n) {
  require(n > 0 && n % 2 == 0, "real FFT size must be positive and even");
  auto p = real_plans(n);
  r2c_ = p.r2c;
  c2r_ = p.c2r;
}

void RealFft3::forward(const double* in, cdouble* out) const {
  fftw_execute_dft_r2c(r2c_, const_cast<double*>(in), as_fftw(out));
}

void RealFft3::backward(cdouble* in, double* out) const {
  fftw_execute_dft_c2r(c2r_, as_fftw(in), out);
}

}  // namespace scatterlab
