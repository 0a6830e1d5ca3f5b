// parallel.hpp: index-ordered parallel map over independent work items

#pragma once

#include <cstddef>
#include <functional>

namespace dephase {

// Worker cap used when a call passes threads = 0. Defaults to the hardware
// concurrency; the CLI sets it from --threads.
void set_default_threads(unsigned n);
unsigned default_threads();

// Calls fn(i) for i in [0, n). Results must be written to slot i by the
// callee, so the outcome never depends on scheduling. The first exception
// thrown by any item is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads = 0);

}  // namespace dephase
