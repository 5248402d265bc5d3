#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <omp.h>

namespace lodreg::par {

// Fixed chunk width for reductions. Partial results are computed per chunk
// and combined in chunk order, so sums are bit-identical for any worker
// count (and identical to the serial path, which walks the same chunks).
inline constexpr std::ptrdiff_t kChunk = 64;

inline void set_workers(int n) {
  if (n > 0) omp_set_num_threads(n);
}

inline int workers() { return omp_get_max_threads(); }

// chunk_fn(lo, hi) -> Partial for [lo, hi); combine(acc, partial) applied
// sequentially in chunk order.
template <class Partial, class ChunkFn, class CombineFn>
void chunked_reduce(std::ptrdiff_t n, Partial& acc, ChunkFn&& chunk_fn,
                    CombineFn&& combine, bool parallel = true) {
  if (n <= 0) return;
  const std::ptrdiff_t n_chunks = (n + kChunk - 1) / kChunk;
  if (!parallel || n_chunks == 1 || omp_in_parallel()) {
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
      const std::ptrdiff_t lo = c * kChunk;
      const std::ptrdiff_t hi = std::min(n, lo + kChunk);
      Partial part = chunk_fn(lo, hi);
      combine(acc, part);
    }
    return;
  }
  std::vector<Partial> partials(static_cast<std::size_t>(n_chunks));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
    const std::ptrdiff_t lo = c * kChunk;
    const std::ptrdiff_t hi = std::min(n, lo + kChunk);
    partials[static_cast<std::size_t>(c)] = chunk_fn(lo, hi);
  }
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c)
    combine(acc, partials[static_cast<std::size_t>(c)]);
}

// Independent tasks indexed 0..n-1; fn(i) writes its own output slot, so
// results do not depend on scheduling.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn, bool parallel = true) {
  if (!parallel || omp_in_parallel()) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) fn(i);
}

}  // namespace lodreg::par
