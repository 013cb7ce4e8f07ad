#pragma once

#include <cstdint>
#include <string_view>

namespace rsdlab {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// FNV-1a, used to turn purpose labels into stream tags.
inline std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// SplitMix64 generator. Output is a pure function of the 64-bit state, so a
// stream is fully determined by its seed on every platform. std:: engines are
// avoided for the distributions because the standard does not pin their
// output down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, bound) via Lemire's multiply-with-rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  std::uint64_t state_;
};

// Independent substream for (master seed, purpose label, replication index).
// Replication results depend only on this triple, never on scheduling, which
// is what makes parallel runs reproducible.
inline Rng derive_stream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t index) {
  std::uint64_t s = mix64(master_seed ^ 0x8badf00d5eed5eedULL);
  s = mix64(s ^ hash_label(purpose));
  s = mix64(s + 0x9e3779b97f4a7c15ULL * (index + 1));
  return Rng(s);
}

}  // namespace rsdlab
