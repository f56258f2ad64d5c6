#pragma once

#include <cstddef>
#include <functional>

namespace graft {

// Number of worker threads used for embarrassingly parallel loops.
// Capped by the GRAFT_THREADS environment variable (1 disables threading).
size_t worker_count();

// Runs fn(i) for i in [0, n). Work items must be independent; callers are
// responsible for writing results into per-index slots so that the outcome
// does not depend on scheduling.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace graft
