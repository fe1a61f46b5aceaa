#pragma once

#include <cstddef>
#include <functional>

namespace fluxlim {

/// Number of worker threads used by data-parallel kernels. Read once from
/// FLUXLIM_THREADS (default 1).
int kernel_threads();

/// Override the thread cap (tests, benchmarks). Values < 1 are clamped to 1.
void set_kernel_threads(int n);

/// Calls body(begin, end) over disjoint chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count; the body must not write outside
/// its own range.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fluxlim
