#pragma once

#include <cstddef>
#include <functional>

namespace attr {

// Worker count from ATTRACTOR_THREADS (default: hardware concurrency, at least 1).
int thread_count();

// Runs body(i) for i in [0, n). Each index writes only its own slot, so results do
// not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace attr
