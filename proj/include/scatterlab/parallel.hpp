#pragma once

#include <omp.h>

#include <algorithm>
#include <cstddef>
#include <vector>

namespace scatterlab {

/// Worker count used by every parallel region. Starts from SCATTERLAB_THREADS when set,
/// otherwise from the OpenMP default.
int thread_count();
void set_thread_count(int threads);

/// Fixed block length for reductions; results never depend on the thread count.
inline constexpr std::size_t kReductionBlock = 4096;

/// Sum of term(i) for i < n. Blocks are summed in parallel, the partials serially in order.
template <class T, class F>
T blocked_sum(std::size_t n, F&& term) {
  std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (blocks <= 1) {
    T acc{};
    for (std::size_t i = 0; i < n; ++i) acc += term(i);
    return acc;
  }
  std::vector<T> partial(blocks, T{});
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::size_t b = 0; b < blocks; ++b) {
    T acc{};
    std::size_t end = std::min(n, (b + 1) * kReductionBlock);
    for (std::size_t i = b * kReductionBlock; i < end; ++i) acc += term(i);
    partial[b] = acc;
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace scatterlab
