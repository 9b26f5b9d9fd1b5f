#pragma once

#include <cstdint>
#include <functional>

namespace stdgan::par {

// Worker count: min(hardware_concurrency, STDGAN_THREADS) with a floor of 1.
int max_threads();
void set_max_threads(int n);

// Static partition of [begin, end) into at most max_threads() contiguous
// chunks. Chunks are disjoint, so results are identical for any worker count
// as long as no chunk reduces into shared state.
void parallel_for(int64_t begin, int64_t end,
                  const std::function<void(int64_t, int64_t)>& body,
                  int64_t grain = 1);

} // namespace stdgan::par
