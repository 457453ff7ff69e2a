#include "freqdim/rng.hpp"

namespace freqdim {

namespace {
constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}
}  // namespace

std::array<std::uint64_t, 4> philox4x64(const RngKey& key, std::uint64_t index) {
  std::uint64_t c0 = index, c1 = 0, c2 = 0, c3 = 0;
  std::uint64_t k0 = key.seed, k1 = key.stream;
  for (int r = 0; r < 10; ++r) {
    if (r) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c0, hi0, lo0);
    mulhilo(kMul1, c2, hi1, lo1);
    const std::uint64_t n0 = hi1 ^ c1 ^ k0;
    const std::uint64_t n1 = lo1;
    const std::uint64_t n2 = hi0 ^ c3 ^ k1;
    const std::uint64_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
  }
  return {c0, c1, c2, c3};
}

std::uint64_t uniform_bits(const RngKey& key, std::uint64_t index) {
  return philox4x64(key, index)[0];
}

double uniform01(const RngKey& key, std::uint64_t index) {
  return static_cast<double>(uniform_bits(key, index) >> 11) * 0x1.0p-53;
}

}  // namespace freqdim
