#pragma once

#include <cstddef>
#include <functional>

namespace morphiris {

/// Worker count: MORPHIRIS_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Items are
/// claimed dynamically; callers write results into per-index slots so the
/// output never depends on scheduling. The first exception thrown by any
/// item is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace morphiris
