#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace idsim {

/// Worker count: IDSIM_THREADS when set and positive, else the hardware
/// concurrency (at least 1).
inline unsigned worker_count() {
  if (const char* env = std::getenv("IDSIM_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates fn(i) for i in [0, reps) and stores results by index.
///
/// Work is cut into fixed chunks handed out round-robin; each replication
/// owns its output slot, so results do not depend on the worker count.
/// fn must derive its randomness from i alone.
template <class Result, class Fn>
std::vector<Result> replicate(std::uint64_t reps, Fn&& fn, unsigned workers = worker_count()) {
  std::vector<Result> out(reps);
  constexpr std::uint64_t kChunk = 1024;
  const std::uint64_t chunks = (reps + kChunk - 1) / kChunk;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, workers), std::max<std::uint64_t>(chunks, 1)));
  auto run = [&](unsigned w) {
    for (std::uint64_t c = w; c < chunks; c += workers) {
      const std::uint64_t end = std::min(reps, (c + 1) * kChunk);
      for (std::uint64_t i = c * kChunk; i < end; ++i) out[i] = fn(i);
    }
  };
  if (workers == 1) {
    run(0);
    return out;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        run(w);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Splits a vector of fixed-size tuples into per-component columns.
template <std::size_t K>
std::array<std::vector<double>, K> columns(const std::vector<std::array<double, K>>& rows) {
  std::array<std::vector<double>, K> cols;
  for (auto& c : cols) c.reserve(rows.size());
  for (const auto& r : rows)
    for (std::size_t k = 0; k < K; ++k) cols[k].push_back(r[k]);
  return cols;
}

}  // namespace idsim
