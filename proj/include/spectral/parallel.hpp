#pragma once

#include <cstddef>
#include <functional>

namespace spectral {

/// Worker count from SPECTRAL_THREADS (default 1, clamped to >= 1).
std::size_t configured_threads();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Tasks must
/// write to disjoint outputs; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task, std::size_t threads = 0);

} // namespace spectral
