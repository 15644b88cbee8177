#pragma once

#include <algorithm>
#include <exception>
#include <thread>

namespace mbgeom {

template <typename Value>
std::vector<Value> evaluate_nodes(const QuadratureGrid& grid,
                                  const std::function<Value(const Coords&)>& f) {
  std::vector<Value> out(grid.size());
  const int threads = std::min<int>(quadrature_threads(), static_cast<int>(grid.size()));
  if (threads <= 1) {
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = f(grid[k].x);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (grid.size() + threads - 1) / threads;
  std::vector<std::exception_ptr> failures(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(grid.size(), begin + chunk);
      try {
        for (std::size_t k = begin; k < end; ++k) out[k] = f(grid[k].x);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  for (auto& e : failures)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace mbgeom
