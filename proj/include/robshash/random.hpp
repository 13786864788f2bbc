#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace robshash {

// All randomized code draws from MT19937-64. Independent streams are obtained
// by hashing a base seed together with integer keys (tree index, replication
// index, ...) through the SplitMix64 finalizer, so a stream depends only on
// its keys and never on the order in which work is scheduled.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base,
                                    std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Stream labels, kept distinct so that e.g. the contaminant draw of a
// replication never shares a stream with its base draw.
enum class Stream : std::uint64_t {
  Base = 1,
  ContaminationIndex = 2,
  ContaminationValue = 3,
  ContaminationSign = 4,
  Calibration = 5,
  Forest = 6,
  Replication = 7,
};

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
  return derive_seed(seed, {static_cast<std::uint64_t>(s)});
}

}  // namespace robshash
