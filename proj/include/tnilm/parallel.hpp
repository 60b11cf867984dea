#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tnilm {

// Runs job(c) for c in [0, jobs) on up to `workers` threads and rethrows the
// first failure once every thread has stopped.
template <class Job>
void parallel_for(std::size_t jobs, std::size_t workers, Job&& job) {
  if (workers <= 1 || jobs <= 1) {
    for (std::size_t c = 0; c < jobs; ++c) job(c);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr failure;
  auto loop = [&] {
    for (;;) {
      std::size_t c;
      {
        std::lock_guard lock(mu);
        if (next >= jobs || failure) return;
        c = next++;
      }
      try {
        job(c);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, jobs); ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tnilm
