#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mcdet {

/// SplitMix64 step; used to expand seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ engine (Blackman/Vigna). Satisfies UniformRandomBitGenerator,
/// so the <random> distributions can run on top of it.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_;
};

/// Independent stream for one (master seed, stream id) pair. Trials seeded this
/// way give results that do not depend on worker count or scheduling.
inline Xoshiro256pp trial_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::uint64_t mix = master_seed;
  std::uint64_t a = splitmix64(mix);
  mix ^= 0x6a09e667f3bcc909ULL + stream_id + (mix << 6) + (mix >> 2);
  std::uint64_t b = splitmix64(mix);
  return Xoshiro256pp(a ^ (b + 0x9e3779b97f4a7c15ULL * (stream_id + 1)));
}

}  // namespace mcdet
