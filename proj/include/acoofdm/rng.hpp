#pragma once

#include <cstdint>

namespace acoofdm {

// splitmix64 step; used to spread user seeds into well-separated substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d649fbb9f749ddULL;
  return z ^ (z >> 31);
}

// Deterministic seed for substream `stream` of a base seed. Distinct streams
// (Monte Carlo batches, sweep points) get statistically independent seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  std::uint64_t s = base ^ (0xd1342543de82ef95ULL * (stream + 1));
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace acoofdm
