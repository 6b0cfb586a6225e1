#pragma once

#include <cstddef>
#include <functional>

namespace subfinsler {

/// Worker cap: SUBFINSLER_THREADS when set, else hardware concurrency.
unsigned max_parallelism();

/// Runs fn(0..n-1) across worker threads. fn must write only to its own
/// index's slots; results are therefore identical to a serial run regardless
/// of scheduling. Nested calls run serially on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace subfinsler
