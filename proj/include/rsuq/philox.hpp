#ifndef RSUQ_PHILOX_HPP_
#define RSUQ_PHILOX_HPP_

#include <array>
#include <cstdint>

namespace rsuq {

/// Philox-4x32-10 counter-based generator (Salmon et al., SC'11). Output
/// is a pure function of (key, counter), so any word of the stream can be
/// addressed directly.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Block operator()(Block counter) const {
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * counter[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }

  /// The index-th 64-bit word of the stream selected by `domain`.
  std::uint64_t word(std::uint64_t index, std::uint32_t domain = 0) const {
    const std::uint64_t block = index >> 1;
    const Block out = (*this)({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), domain, 0});
    const int lane = static_cast<int>(index & 1) * 2;
    return (static_cast<std::uint64_t>(out[lane + 1]) << 32) | out[lane];
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::array<std::uint32_t, 2> key_;
};

/// Uniform in [0, 1) from the top 53 bits.
inline double unit_uniform(std::uint64_t word) { return static_cast<double>(word >> 11) * 0x1.0p-53; }

/// Uniform in (0, 1) from the top 52 bits; never 0 or 1.
inline double open_unit_uniform(std::uint64_t word) {
  return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

/// SplitMix64 finalizer; derives independent per-vector seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace rsuq

#endif  // RSUQ_PHILOX_HPP_
