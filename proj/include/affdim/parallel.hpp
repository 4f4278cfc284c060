#pragma once

#include <cstddef>
#include <functional>

namespace affdim {

/// Library-wide worker count (>= 1). Defaults to $AFFDIM_THREADS or 1.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// must write only to its own output slot; callers reduce in index order so
/// results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace affdim
