#include "scatterlab/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace scatterlab {
namespace {

int initial_threads() {
  if (const char* env = std::getenv("SCATTERLAB_THREADS")) {
    try {
      int t = std::stoi(env);
      if (t > 0) return t;
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

std::atomic<int>& threads_slot() {
  static std::atomic<int> slot{initial_threads()};
  return slot;
}

}  // namespace

int thread_count() { return threads_slot().load(std::memory_order_relaxed); }

void set_thread_count(int threads) { threads_slot().store(threads > 0 ? threads : 1, std::memory_order_relaxed); }

}  // namespace scatterlab
