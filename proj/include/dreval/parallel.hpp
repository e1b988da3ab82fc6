#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace dreval {

/// Applies fn to every index in [0, n) on up to `workers` threads and returns
/// results in index order. The first exception thrown by fn is rethrown after
/// all workers stop.
template <typename Fn>
auto parallel_map(std::size_t n, std::size_t workers, Fn&& fn) {
  using Result = decltype(fn(std::size_t{}));
  std::vector<std::optional<Result>> slots(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t count = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (count == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Result> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dreval
