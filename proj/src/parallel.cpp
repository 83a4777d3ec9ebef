#include "monster/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace monster {
namespace {

std::atomic<int> g_threads{1};

}  // namespace

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() { return g_threads.load(); }

void parallel_chunks(int begin, int end, const std::function<void(int, int, int)>& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = std::min(num_threads(), n);
  if (workers == 1) {
    fn(0, begin, end);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long>(n) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long>(n) * (w + 1) / workers);
    pool.emplace_back([&, w, lo, hi] {
      try {
        fn(w, lo, hi);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  parallel_chunks(begin, end, [&](int, int lo, int hi) {
    for (int i = lo; i < hi; ++i) fn(i);
  });
}

}  // namespace monster
