#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace nphm {

// Worker-pool degree shared by all data-parallel loops. Results of the
// loops below are deterministic for a fixed thread count: work is split
// into contiguous chunks whose boundaries depend only on (n, threads),
// and reductions combine chunk results in chunk order.

void set_thread_count(int n);
int thread_count();

/// Runs body(begin, end) on contiguous index ranges covering [0, n).
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

/// Runs body(chunk_index, begin, end); chunk_index is dense in [0, chunks).
/// Returns the number of chunks used.
int parallel_chunks(std::int64_t n,
                    const std::function<void(int, std::int64_t, std::int64_t)>& body);

}  // namespace nphm
