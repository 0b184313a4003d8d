#pragma once

// Counter-based normal variates: every sample is a pure function of its
// (seed, stream, frame, channel, row, col) key, so tensors come out the same
// regardless of evaluation order or thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace vlipp {

// Philox4x32 with 10 rounds (Salmon et al., Random123).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
};

// Independent sample families drawn from one seed.
enum class NoiseStream : std::uint32_t {
  structured = 0,  // frame-0 noise and fresh fill of the warped tensor
  injection = 1,   // zeta of the injection blend
};

struct NoiseKey {
  std::uint64_t seed = 0;
  NoiseStream stream = NoiseStream::structured;
  std::uint32_t frame = 0;
  std::uint32_t channel = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
};

// Standard normal via Box-Muller on two 53-bit uniforms from one Philox block.
inline double standard_normal(const NoiseKey& k) noexcept {
  const Philox4x32::Counter ctr = {k.frame, (static_cast<std::uint32_t>(k.stream) << 16) | (k.channel & 0xFFFF),
                                   k.row, k.col};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(k.seed), static_cast<std::uint32_t>(k.seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t a = ((std::uint64_t{r[0]} << 32) | r[1]) >> 11;
  const std::uint64_t b = ((std::uint64_t{r[2]} << 32) | r[3]) >> 11;
  const double u1 = 1.0 - static_cast<double>(a) * scale;  // (0, 1]
  const double u2 = static_cast<double>(b) * scale;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace vlipp
