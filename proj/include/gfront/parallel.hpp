#pragma once

#include <cstddef>
#include <functional>

namespace gfront {

/// Global worker count. 0 = auto (hardware_concurrency, overridable by the
/// GFRONT_THREADS environment variable).
void set_thread_count(int n);
int thread_count();

/// Runs fn(begin, end) on contiguous index chunks. Deterministic: the chunk
/// decomposition depends only on (n, thread_count). Serial when the range is
/// small or only one worker is configured.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace gfront
