#pragma once

#include <cstdint>

namespace bcp {

// Counter-based 64-bit generator (SplitMix64). The whole state is a single
// word, so checkpointing and parallel stream derivation stay trivial and the
// seed-to-stream mapping is stable across platforms and builds.
//
// Stream contract (frozen; changing it invalidates recorded runs):
//   state(seed, stream) = mix64(seed + (stream + 1) * 0x9e3779b97f4a7c15)
// where mix64 is the SplitMix64 output finalizer. Stream 0 is the default
// stream; scan points and parallel chains use their grid index as stream id.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  SplitMix64() : state_(0) {}
  explicit SplitMix64(std::uint64_t seed) : state_(mix64(seed)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Raw state access for checkpoints. set_state restores an exact position.
  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static SplitMix64 for_stream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g;
    g.state_ = mix64(seed + (stream + 1) * 0x9e3779b97f4a7c15ull);
    return g;
  }

 private:
  std::uint64_t state_;
};

// Uniform double in [0, 1) from the top 53 bits. Implementation-independent,
// unlike std::uniform_real_distribution.
inline double uniform01(SplitMix64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(SplitMix64& g, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t x = g();
    if (x >= threshold) return x % n;
  }
}

}  // namespace bcp
