#pragma once
#include <cstddef>
#include <functional>

namespace kerr {

// Static-partition parallel_for over [0, n).  Each worker gets one contiguous
// chunk, so writes to disjoint slots are race-free and every reduction that
// fills per-index slots is bitwise deterministic regardless of thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

// Convenience: per-index body.
void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn);

void set_thread_count(unsigned n);  // 0 -> hardware concurrency
unsigned thread_count();

}  // namespace kerr
