#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fixrec::par {

/// Execution mode for the data-parallel kernels. Every kernel taking an Exec
/// produces bit-identical results in both modes: parallel execution only
/// fills per-index (or per-chunk) slots concurrently, and all floating-point
/// combination happens afterwards in a fixed left-to-right order. The serial
/// mode is the reference implementation and is what the tests compare
/// against; `benchmark` times the two against each other.
enum class Exec { serial, parallel };

/// Runs fn(i) for every i in [0, n). fn must only touch state private to
/// its index.
template <class F>
void for_each_index(std::size_t n, Exec mode, F&& fn) {
  if (mode == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
#endif
  }
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

/// Sum of term(i) over [0, n). Terms are materialized per index and reduced
/// left to right, so the result does not depend on mode or thread count.
template <class F>
double indexed_sum(std::size_t n, Exec mode, F&& term) {
  std::vector<double> parts(n);
  for_each_index(n, mode, [&](std::size_t i) { parts[i] = term(i); });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

/// Vector-valued analogue. add_into(i, acc) accumulates index i's
/// contribution into a chunk-local buffer of length dim; chunks are a fixed
/// size independent of thread count and are combined in ascending order.
template <class F>
std::vector<double> indexed_vector_sum(std::size_t n, std::size_t dim, Exec mode, F&& add_into) {
  constexpr std::size_t kChunk = 256;
  const std::size_t n_chunks = n == 0 ? 0 : (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> parts(n_chunks);
  for_each_index(n_chunks, mode, [&](std::size_t c) {
    auto& acc = parts[c];
    acc.assign(dim, 0.0);
    const std::size_t hi = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < hi; ++i) add_into(i, acc);
  });
  std::vector<double> total(dim, 0.0);
  for (const auto& acc : parts) {
    for (std::size_t j = 0; j < dim; ++j) total[j] += acc[j];
  }
  return total;
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace fixrec::par
