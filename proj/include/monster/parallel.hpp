#pragma once

#include <functional>

namespace monster {

/// Number of worker threads used by row-parallel kernels. Results never
/// depend on this value: work is split into fixed, disjoint index ranges.
void set_num_threads(int n);
int num_threads();

/// Calls fn(i) for every i in [begin, end). Each index is visited exactly once.
void parallel_for(int begin, int end, const std::function<void(int)>& fn);

/// Like parallel_for but hands each worker a contiguous chunk plus its slot id,
/// for kernels that need per-thread scratch buffers.
void parallel_chunks(int begin, int end, const std::function<void(int slot, int lo, int hi)>& fn);

}  // namespace monster
