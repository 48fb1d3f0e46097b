#pragma once

#include <cstddef>
#include <functional>

namespace enstrophy {

/// Worker budget: ENSTROPHY_LAB_WORKERS if set to a positive integer,
/// otherwise the hardware concurrency.
unsigned worker_count();

/// Calls body(i) for every i in [0, count) on up to worker_count() threads.
/// Bodies must write only to per-index slots; the first exception thrown by
/// any body is rethrown after all workers have joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace enstrophy
