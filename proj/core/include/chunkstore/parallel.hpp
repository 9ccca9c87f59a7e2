#pragma once

#include <cstddef>
#include <functional>

namespace chunkstore {

/// Worker count: CHUNKSTORE_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Splits [0, n) into contiguous ranges and runs `body(begin, end)` on up to
/// `threads` workers. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace chunkstore
