#pragma once
#include <array>
#include <cstdint>

namespace freqdim {

// Counter-based generator (Philox 4x64, 10 rounds,
// https://en.wikipedia.org/wiki/Counter-based_random_number_generator).
// A draw is a pure function of (seed, stream, index): replicated runs are
// reproducible and independent of evaluation order across workers, and streams
// support O(1) random access without storing a prefix.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

std::array<std::uint64_t, 4> philox4x64(const RngKey& key, std::uint64_t index);

// 53-bit uniform in [0, 1)
double uniform01(const RngKey& key, std::uint64_t index);

std::uint64_t uniform_bits(const RngKey& key, std::uint64_t index);

}  // namespace freqdim
