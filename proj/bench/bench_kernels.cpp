// Parallel kernels against their serial references, plus the FFT resolvent against the direct sum.
#include <benchmark/benchmark.h>

#include <vector>

#include "scatterlab/forward.hpp"
#include "scatterlab/kernels.hpp"
#include "scatterlab/reference.hpp"

namespace {

using namespace scatterlab;

GridSpec3 grid_of(int n) { return make_grid(n, 0.5); }

std::vector<double> bump_weight(const GridSpec3& g) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-8.0 * dot(g.node(i), g.node(i)));
  return w;
}

void BM_WhiteNoiseParallel(benchmark::State& st) {
  auto g = grid_of(static_cast<int>(st.range(0)));
  std::vector<double> out(g.size());
  for (auto _ : st) {
    kernels::white_noise(g, 7, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_WhiteNoiseSerial(benchmark::State& st) {
  auto g = grid_of(static_cast<int>(st.range(0)));
  std::vector<double> out(g.size());
  for (auto _ : st) {
    reference::white_noise(g, 7, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_FarFieldParallel(benchmark::State& st) {
  auto g = grid_of(static_cast<int>(st.range(0)));
  auto w = bump_weight(g);
  std::vector<cdouble> f(g.size(), cdouble(1.0, 0.5));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::far_field_sum(g, w, f, {0.0, 0.6, 0.8}, 12.0));
}

void BM_FarFieldSerial(benchmark::State& st) {
  auto g = grid_of(static_cast<int>(st.range(0)));
  auto w = bump_weight(g);
  std::vector<cdouble> f(g.size(), cdouble(1.0, 0.5));
  for (auto _ : st) benchmark::DoNotOptimize(reference::far_field_sum(g, w, f, {0.0, 0.6, 0.8}, 12.0));
}

void BM_ResolventFft(benchmark::State& st) {
  GridSpec3 g{8, 0.5, 0.125, 0.125 * 0.125 * 0.125};
  std::vector<cdouble> f(g.size(), cdouble(1.0));
  forward::FreeResolvent r0(g, 6.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(r0.apply(f));
}

void BM_ResolventDirect(benchmark::State& st) {
  GridSpec3 g{8, 0.5, 0.125, 0.125 * 0.125 * 0.125};
  std::vector<cdouble> f(g.size(), cdouble(1.0));
  for (auto _ : st) benchmark::DoNotOptimize(reference::direct_resolvent(g, f, 6.0, 1.0));
}

}  // namespace

BENCHMARK(BM_WhiteNoiseParallel)->Arg(32)->Arg(64);
BENCHMARK(BM_WhiteNoiseSerial)->Arg(32)->Arg(64);
BENCHMARK(BM_FarFieldParallel)->Arg(32)->Arg(64);
BENCHMARK(BM_FarFieldSerial)->Arg(32)->Arg(64);
BENCHMARK(BM_ResolventFft);
BENCHMARK(BM_ResolventDirect);

BENCHMARK_MAIN();
