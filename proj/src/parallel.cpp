#include "mflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mflow {

void for_each_chunk(std::size_t n, const ExecPolicy& policy,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t chunk = policy.chunk == 0 ? 1 : policy.chunk;
  const std::size_t n_chunks = chunk_count(n, policy);
  if (n_chunks == 0) return;

  auto run = [&](std::size_t c) { fn(c, c * chunk, std::min(n, (c + 1) * chunk)); };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(policy.workers, 1)), n_chunks);
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        try {
          run(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n_chunks);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace mflow
