#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace rsc {

/// Worker count: RSC_SIM_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Calls body(i) for i in [0, count) on up to thread_count() threads. Indices are
/// split into contiguous blocks; body must only write to per-index storage.
/// The first exception thrown by any worker is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// splitmix64 finaliser.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent substream seed for task `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

} // namespace rsc
