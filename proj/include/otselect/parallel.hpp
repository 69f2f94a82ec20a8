#pragma once

#include <cstddef>
#include <functional>

namespace otselect {

// Worker count for inner kernels. Reads OTSELECT_THREADS once; defaults to
// the hardware concurrency. set_thread_count overrides it (0 restores the
// environment default).
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(begin, end) over [0, n) split into contiguous chunks. Each index
// is visited by exactly one call; callers must only write to per-index output
// so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace otselect
