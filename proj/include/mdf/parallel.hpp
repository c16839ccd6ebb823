#pragma once

#include <functional>

namespace mdf {

// Worker count: MDF_THREADS environment variable if set (>= 1), otherwise
// std::thread::hardware_concurrency().
int thread_count();

// Runs body(begin_i, end_i) on contiguous chunks of [begin, end), one chunk
// per worker. Chunks must write disjoint outputs; results are then
// independent of the number of workers. Exceptions from workers are
// rethrown on the calling thread.
void parallel_for(int begin, int end, const std::function<void(int, int)>& body);

}  // namespace mdf
