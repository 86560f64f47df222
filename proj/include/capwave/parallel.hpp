#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace capwave {

/// Thread budget for the parallel loops. Results never depend on it: work is
/// split into index ranges whose outputs are disjoint or merged in a fixed order.
struct Execution {
  int threads = 1;
};

// Calls body(begin, end) over [0, n) split into contiguous blocks, one per
// thread. body must only write to outputs owned by its index range.
template <typename Body>
void parallel_for(std::size_t n, const Execution& exec, Body&& body) {
  const auto nthreads =
      static_cast<std::size_t>(std::clamp(exec.threads, 1, 256));
  if (nthreads == 1 || n < 2 * nthreads) {
    body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(nthreads);
  const std::size_t chunk = (n + nthreads - 1) / nthreads;
  for (std::size_t t = 0; t < nthreads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    workers.emplace_back([&, t, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace capwave
