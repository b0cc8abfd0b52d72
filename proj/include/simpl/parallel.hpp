#pragma once

#include <cstddef>
#include <functional>

namespace simpl {

/// Worker count, read once from SIMPL_THREADS (default 1).
int thread_count();

/// Overrides the worker count for the current process (tests only).
void set_thread_count(int n);

/// Index ranges are cut into fixed blocks of this size regardless of the
/// worker count, so block-wise reductions are bit-reproducible.
inline constexpr std::size_t kReductionBlock = 512;

/// Calls body(begin, end) for every block of [0, n).
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Sums term(i) over [0, n): each block is summed serially, and the block
/// partials are added in block order.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace simpl
