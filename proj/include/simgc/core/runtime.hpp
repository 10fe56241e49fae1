#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace simgc {

/// Process-wide execution switches.
///
/// Deterministic mode pins every parallel region to one worker so results are
/// bitwise reproducible. The row-partitioned kernels already accumulate each
/// output row in a fixed order, but the flag also covers anything that might
/// reduce across workers.
class Runtime {
 public:
  static void set_deterministic(bool on) noexcept { deterministic_flag() = on; }
  static bool deterministic() noexcept { return deterministic_flag(); }

  static void set_num_threads(std::size_t n) noexcept { threads_flag() = n; }

  static std::size_t workers() noexcept {
    if (deterministic()) return 1;
    std::size_t n = threads_flag();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
  }

 private:
  static std::atomic<bool>& deterministic_flag() noexcept {
    static std::atomic<bool> flag{false};
    return flag;
  }
  static std::atomic<std::size_t>& threads_flag() noexcept {
    static std::atomic<std::size_t> n{0};
    return n;
  }
};

/// Run `body(begin, end)` over [0, count) split into contiguous chunks.
template <class Body>
void parallel_rows(std::size_t count, Body&& body, std::size_t min_chunk = 256) {
  const std::size_t workers = std::min(Runtime::workers(), std::max<std::size_t>(1, count / min_chunk));
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace simgc
