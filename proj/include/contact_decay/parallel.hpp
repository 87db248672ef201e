#pragma once

#include <cstddef>
#include <functional>

namespace contact_decay {

// Worker count: CONTACT_DECAY_THREADS when set to a positive integer,
// otherwise std::thread::hardware_concurrency() (at least 1).
int default_thread_count();

// Replicates are grouped into fixed blocks of this many indices. Block
// boundaries do not depend on the worker count, so per-block partial results
// reduced in block order are identical for any number of threads.
inline constexpr std::size_t kReplicateBlock = 1024;

inline std::size_t block_count(std::size_t items, std::size_t block = kReplicateBlock) {
  return (items + block - 1) / block;
}

// Calls fn(block_index, begin, end) once per block, spread over `threads`
// workers (threads <= 0 selects default_thread_count()). The first exception
// thrown by any block is rethrown after all workers join.
void parallel_blocks(std::size_t items, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                     std::size_t block = kReplicateBlock);

}  // namespace contact_decay
