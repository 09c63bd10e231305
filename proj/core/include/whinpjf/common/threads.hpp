#pragma once

#include <cstddef>
#include <functional>

namespace whinpjf {

/// Worker cap: `WHIN_PJF_THREADS` when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs task(i) for i in [0, count) on up to worker_count() threads.
///
/// Tasks must write only to disjoint outputs; callers that reduce results do
/// so afterwards in index order, which keeps results independent of the
/// thread count. The first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

}  // namespace whinpjf
