#pragma once

#include <cstdint>

namespace liftlab {

// splitmix64 finalizer, used for seeding and for deriving substream keys.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ behind a fixed, platform-independent interface. Every sampling
// routine in the library takes one of these explicitly; nothing draws from
// hidden global state, and none of the std:: distributions (whose algorithms
// are implementation-defined) are used. Re-running with the same seed
// therefore reproduces every draw bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // seed the state with a splitmix64 chain, as recommended for xoshiro
    std::uint64_t z = seed;
    for (auto& word : state_) {
      z = mix64(z);
      word = z;
    }
  }

  // Key for an independent stream derived from (root, a, b). The harness
  // uses this as derive_seed(seed, trial): parallel and serial execution of
  // trials see identical streams.
  static std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                   std::uint64_t b = 0) {
    return mix64(mix64(root ^ mix64(a + 0x0ddc0ffeebadf00dull)) ^ mix64(b));
  }

  static Rng substream(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    return Rng(derive_seed(root, a, b));
  }

  std::uint64_t next() {
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

  // uniform double in [0, 1), 53 random bits
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on {0, ..., n-1}, unbiased via rejection
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // ±1 with equal probability
  int sign() { return (next() >> 63) ? 1 : -1; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int s) {
    return (x << s) | (x >> (64 - s));
  }

  std::uint64_t state_[4];
};

}  // namespace liftlab
