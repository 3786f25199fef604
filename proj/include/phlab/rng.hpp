#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace phlab {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// A (seed, stream) pair fixes the key and the upper half of the counter, so every
// worker can own an independent stream and results do not depend on scheduling.
class Philox4x32 {
 public:
  using Block = std::array<uint32_t, 4>;
  using Key = std::array<uint32_t, 2>;

  static Block generate(Block counter, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const uint64_t p0 = uint64_t{0xD2511F53u} * counter[0];
      const uint64_t p1 = uint64_t{0xCD9E8D57u} * counter[2];
      counter = {static_cast<uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<uint32_t>(p1),
                 static_cast<uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<uint32_t>(p0)};
    }
    return counter;
  }
};

class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t stream) noexcept
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, stream_(stream) {}

  uint64_t seed() const noexcept { return uint64_t{key_[0]} | (uint64_t{key_[1]} << 32); }
  uint64_t stream() const noexcept { return stream_; }

  uint64_t next_u64() noexcept {
    if (used_ >= 2) refill();
    const uint64_t v = uint64_t{block_[2 * used_]} << 32 | block_[2 * used_ + 1];
    ++used_;
    return v;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) noexcept {
    // Lemire's multiply-shift; the bias is < 2^-64 * n and irrelevant here.
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  void refill() noexcept {
    const Philox4x32::Block ctr{static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
                                static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    block_ = Philox4x32::generate(ctr, key_);
    ++counter_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  uint64_t stream_;
  uint64_t counter_ = 0;
  Philox4x32::Block block_{};
  int used_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stateless 64-bit mixer (SplitMix64 finalizer).
inline uint64_t mix64(uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace phlab
