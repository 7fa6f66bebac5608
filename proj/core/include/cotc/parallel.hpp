#pragma once

#include <cstddef>
#include <functional>

namespace cotc {

// Runs fn(0..n-1) across at most `workers` threads (values < 2 run inline).
// Indices are handed out atomically; the first exception is rethrown on the
// caller thread after all workers finish. Callers provide index-addressed
// output slots, so results stay in deterministic order regardless of
// scheduling.
void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Worker count actually used for a batch of size n.
int default_worker_count(std::size_t n);

}  // namespace cotc
