#pragma once

#include <cstdint>
#include <random>

namespace orthant_lab {

/// Engine used by every Monte Carlo routine.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent substream `stream` of the run seeded with `seed`.
///
/// Substreams are keyed by (seed, stream) only, so the numbers a path or
/// sample chunk consumes never depend on which worker thread runs it.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t key = splitmix64(splitmix64(seed) ^ splitmix64(~stream));
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Light-weight substream for per-path use, where seed_seq setup would dominate.
inline Rng make_path_stream(std::uint64_t seed, std::uint64_t path) {
  return Rng(splitmix64(splitmix64(seed) + 0xd1b54a32d192ed03ULL * (path + 1)));
}

}  // namespace orthant_lab
