#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace r2e {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Output is a pure function of (counter, key), so any stream position can
// be reproduced without sequential state.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeylA;
        key[1] += kWeylB;
      }
      const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Sequential view over one Philox stream. The stream is identified by the
/// seed (key) and a 96-bit stream id; draws advance the low counter word.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t id0, std::uint32_t id1 = 0,
               std::uint32_t id2 = 0)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0, id0, id1, id2} {}

  /// Stream dedicated to pixel (x, y) during frame interval `interval`.
  static RandomStream for_pixel(std::uint64_t seed, std::uint32_t x,
                                std::uint32_t y, std::uint64_t interval) {
    return RandomStream(seed, (y << 16) ^ x,
                        static_cast<std::uint32_t>(interval),
                        static_cast<std::uint32_t>(interval >> 32) ^ 0x5ca1ab1eu);
  }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(next_u32()) + 0.5) * 0x1p-32;
  }

  /// Standard normal variate (Marsaglia polar method, spare value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double a, b, s;
    do {
      a = 2.0 * uniform() - 1.0;
      b = 2.0 * uniform() - 1.0;
      s = a * a + b * b;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = b * f;
    has_spare_ = true;
    return a * f;
  }

 private:
  void refill() {
    buf_ = Philox4x32::block(ctr_, key_);
    ++ctr_[0];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace r2e
