#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace expmix {

// Chunked parallel loop. Chunk boundaries depend only on n, never on the
// worker count, and all writes go to caller-owned per-index slots, so results
// are bitwise identical for any number of workers.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn,
                  std::size_t chunk = 256) {
  if (n == 0) return;
  if (workers <= 1 || n <= chunk) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t nchunks = (n + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nchunks) return;
      std::size_t lo = c * chunk;
      std::size_t hi = std::min(n, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  int nw = std::min<std::size_t>(workers, nchunks);
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

// Deterministic sum reduction: per-chunk partials are accumulated in index
// order and then combined sequentially in chunk order.
template <typename Fn>
double parallel_sum(std::size_t n, int workers, Fn&& term,
                    std::size_t chunk = 1024) {
  if (n == 0) return 0.0;
  std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(
      nchunks, workers,
      [&](std::size_t c) {
        std::size_t lo = c * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += term(i);
        partial[c] = acc;
      },
      1);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace expmix
