#pragma once

#include <cstddef>
#include <functional>

namespace rolldisc::app {

/// Worker count: ROLLDISC_THREADS if set (>= 1), else the hardware
/// concurrency.
unsigned thread_limit();

/// Runs fn(i) for i in [0, n) on up to thread_limit() threads. Tasks are
/// claimed dynamically; results must be written by index. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace rolldisc::app
