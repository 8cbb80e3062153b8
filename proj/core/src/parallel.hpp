#pragma once

// Deterministic parallel helpers. Work is split into fixed-size blocks that do
// not depend on the thread count, and partial results are combined in block
// order, so results are bitwise reproducible for any --threads value.

#include <cstddef>
#include <exception>
#include <vector>

namespace brz::detail {

inline constexpr std::size_t kSumBlock = 4096;

template <class Term>
double ordered_sum(std::size_t n, Term term) {
  const std::size_t blocks = (n + kSumBlock - 1) / kSumBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
    const std::size_t hi = lo + kSumBlock < n ? lo + kSumBlock : n;
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += term(k);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

// Exceptions thrown by body are captured and the first one is rethrown after
// the loop, since they may not escape an OpenMP region.
template <class Body>
void parallel_for(std::size_t n, Body body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    try {
      body(static_cast<std::size_t>(k));
    } catch (...) {
#pragma omp critical(brz_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace brz::detail
