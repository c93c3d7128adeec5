#pragma once

#include <cstddef>
#include <functional>

namespace knotfit {

/// Worker count: KNOTFIT_THREADS if set (clamped to [1, 256]), otherwise the
/// hardware concurrency.
int thread_count();

/**
 * Runs fn(i) for i in [0, n) on up to thread_count() threads.
 *
 * Tasks must write only to their own slots; results are then identical to a
 * serial run regardless of scheduling.  Exceptions are captured and the first
 * one (lowest index) is rethrown after all workers join.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace knotfit
