#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace drld {

// Purposes keep the random streams of one (seed, block, layer) apart.
enum class StreamPurpose : std::uint32_t { kInit = 1, kExplore = 2, kMask = 3, kBaseline = 4, kReplay = 5 };

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (const auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

inline std::uint64_t derive_seed(std::uint64_t seed, int block, int layer, StreamPurpose purpose) {
  return derive_seed({seed, static_cast<std::uint64_t>(block), static_cast<std::uint64_t>(layer),
                      static_cast<std::uint64_t>(purpose)});
}

}  // namespace drld
