#include "kerr/threadpool.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace kerr {

namespace {
std::atomic<unsigned> g_threads{0};  // 0 = hardware concurrency
}

void set_thread_count(unsigned n) { g_threads.store(n); }

unsigned thread_count() {
  unsigned n = g_threads.load();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn) {
  if (n == 0) return;
  const unsigned nt = std::min<std::size_t>(thread_count(), n);
  if (nt <= 1) {
    chunk_fn(0, n);
    return;
  }
  // Spawn-per-call keeps this dependency-free and cheap relative to the
  // numeric work a chunk carries (mode solves, grid sweeps).
  std::vector<std::thread> workers;
  workers.reserve(nt);
  std::exception_ptr first_error = nullptr;
  std::atomic<bool> failed{false};
  const std::size_t base = n / nt, extra = n % nt;
  std::size_t begin = 0;
  for (unsigned t = 0; t < nt; ++t) {
    const std::size_t len = base + (t < extra ? 1 : 0);
    const std::size_t end = begin + len;
    workers.emplace_back([&, begin, end] {
      try {
        chunk_fn(begin, end);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

void parallel_for_each(std::size_t n, const std::function<void(std::size_t)>& fn) {
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace kerr
