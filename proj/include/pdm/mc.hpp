#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pdm {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Evaluate `fn(index)` for index = 0..count-1 in parallel. Results land in
/// an ordered buffer, so any reduction applied afterwards in index order is
/// bit-identical regardless of the worker count. A throwing path is
/// reported with its index once all workers have drained.
template <typename R, typename Fn>
std::vector<R> mc_map(std::size_t count, int workers, Fn&& fn) {
  std::vector<R> results(count);
  const int nw = resolve_workers(workers);
  if (nw == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::atomic<std::size_t> first_error_index{count};
  std::vector<std::thread> pool;
  const std::size_t chunk = std::max<std::size_t>(1, count / (16 * static_cast<std::size_t>(nw)));

  auto body = [&]() {
    while (true) {
      const std::size_t begin = cursor.fetch_add(chunk);
      if (begin >= count) return;
      const std::size_t end = std::min(count, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          results[i] = fn(i);
        } catch (const std::exception& e) {
          std::size_t expected = count;
          if (first_error_index.compare_exchange_strong(expected, i)) first_error = e.what();
          failed.store(true);
          return;
        }
      }
    }
  };
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (failed.load())
    throw std::runtime_error("mc_map: path " + std::to_string(first_error_index.load()) +
                             " failed: " + first_error);
  return results;
}

struct MeanVar {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  std::size_t count = 0;

  double stderr_of_mean() const {
    return count > 1 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
  }
};

/// Welford reduction in index order.
template <typename It, typename Proj>
MeanVar mean_var(It first, It last, Proj proj) {
  MeanVar mv;
  double m2 = 0.0;
  for (It it = first; it != last; ++it) {
    const double x = proj(*it);
    ++mv.count;
    const double delta = x - mv.mean;
    mv.mean += delta / static_cast<double>(mv.count);
    m2 += delta * (x - mv.mean);
  }
  mv.variance = mv.count > 1 ? m2 / static_cast<double>(mv.count - 1) : 0.0;
  return mv;
}

}  // namespace pdm
