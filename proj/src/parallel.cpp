#include "fluxlim/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fluxlim {

namespace {

// Below this many elements per worker the thread start-up cost dominates.
constexpr std::size_t kMinChunk = 1 << 15;

int threads_from_env() {
  const char* env = std::getenv("FLUXLIM_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return std::max(1, n);
}

std::atomic<int>& thread_cap() {
  static std::atomic<int> cap{threads_from_env()};
  return cap;
}

}  // namespace

int kernel_threads() { return thread_cap().load(); }

void set_kernel_threads(int n) { thread_cap().store(std::max(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t want = std::min<std::size_t>(kernel_threads(), n / kMinChunk);
  if (want <= 1) {
    body(0, n);
    return;
  }
  const std::size_t chunk = (n + want - 1) / want;
  std::vector<std::jthread> workers;
  workers.reserve(want - 1);
  for (std::size_t w = 1; w < want; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo < hi) workers.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  body(0, std::min(n, chunk));
}

}  // namespace fluxlim
