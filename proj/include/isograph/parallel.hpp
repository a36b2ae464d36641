#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace isograph {

/// Worker-pool cap shared by every parallel loop (>= 1).
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) over contiguous static chunks. Each index is
/// visited exactly once, so results written to per-index slots are
/// independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> values);

}  // namespace isograph
