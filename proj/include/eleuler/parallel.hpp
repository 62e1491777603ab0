#pragma once

#include <cstddef>
#include <functional>

namespace eleuler {

/// Worker count: EL_EULER_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Override the worker count for this process (0 restores the default lookup).
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count). Each index is visited exactly once and
/// bodies must only write to index-owned storage, so results do not depend
/// on the thread count. Calls made from inside a worker run serially.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace eleuler
