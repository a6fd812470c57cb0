#pragma once

#include <cstddef>
#include <functional>

namespace mflow {

/// Worker budget handed down from the runner. Chunk size fixes the reduction
/// order, so results depend on (seed, chunk) but never on workers.
struct ExecPolicy {
  int workers = 1;
  std::size_t chunk = 1024;
};

/// Calls fn(chunk_index, begin, end) for every chunk of [0, n). Chunks run on
/// up to policy.workers threads in unspecified order; fn must only write to
/// storage owned by its chunk. Exceptions are rethrown on the caller.
void for_each_chunk(std::size_t n, const ExecPolicy& policy,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, const ExecPolicy& policy) {
  const std::size_t c = policy.chunk == 0 ? 1 : policy.chunk;
  return (n + c - 1) / c;
}

}  // namespace mflow
