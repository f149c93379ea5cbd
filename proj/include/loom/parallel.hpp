#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace loom {

/// Resolves a requested thread count; 0 means one per hardware thread.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs fn(row) for every row in [0, rows). Each row is handled by exactly one
/// worker, so results do not depend on the thread count as long as fn only
/// writes to its own row.
template <typename Fn>
void parallel_rows(int rows, int threads, Fn&& fn) {
  const int n = std::min(resolve_threads(threads), std::max(rows, 1));
  if (n <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n));
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      for (int r = w; r < rows; r += n) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace loom
