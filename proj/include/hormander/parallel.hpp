#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace hormander {

/// Process-wide worker count used by every parallel loop (default 1).
void set_thread_count(int threads);
int thread_count();

/// Runs fn(i) for i in [0, n), split into contiguous chunks over thread_count() workers.
/// Callers write results by index and reduce serially afterwards, so the outcome does
/// not depend on the number of threads. The first exception thrown by a worker is
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

std::uint64_t splitmix64(std::uint64_t x);

/// Independent stream for a (seed, shard) pair.
std::mt19937_64 shard_rng(std::uint64_t seed, std::uint64_t shard);

/// Monte Carlo samples are drawn in shards of this size; shard k always uses
/// shard_rng(seed, k), whatever the thread count.
inline constexpr std::size_t kShardSize = 4096;

}  // namespace hormander
