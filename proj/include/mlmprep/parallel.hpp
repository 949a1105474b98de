#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace mlmprep {

// Applies f to every item on up to `jobs` threads. Results keep input order,
// so output never depends on the thread count. The first exception thrown by
// f is rethrown after all workers stop.
template <class T, class F>
auto parallel_map(const std::vector<T>& items, unsigned jobs, F f) {
  using R = std::invoke_result_t<F&, const T&>;
  std::vector<R> out(items.size());
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), items.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < items.size(); ++i) out[i] = f(items[i]);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size() && !failed; i = next++) {
          try {
            out[i] = f(items[i]);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace mlmprep
