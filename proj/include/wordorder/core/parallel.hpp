#pragma once

#include <cstddef>
#include <functional>

namespace wo {

// Runs fn(0..n-1) across up to `workers` threads. Results must be written to
// per-index slots by the callee; index assignment is dynamic, so the only
// cross-thread contract is that fn touches nothing shared. When several
// indices throw, the lowest index's exception is rethrown, keeping error
// reports independent of thread scheduling. workers <= 1 runs inline.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace wo
