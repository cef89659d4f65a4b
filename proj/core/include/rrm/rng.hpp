#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace rrm {

// splitmix64 finalizer; used both as a stream-derivation hash and to
// expand a seed into the xoshiro state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seedable, platform-independent generator (xoshiro256**) with the few
// samplers the simulator needs. Distribution transforms are implemented
// explicitly so sequences do not depend on the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  // Derives an independent substream from a root seed and a path of
  // indices (e.g. {epoch, network}); same path always yields the same
  // stream regardless of evaluation order.
  static Rng substream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = root;
    for (std::uint64_t id : path) {
      h ^= splitmix64(h) + 0x9e3779b97f4a7c15ull + id;
      std::uint64_t tmp = h + id;
      h = splitmix64(tmp);
    }
    return Rng(h);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cache-free, one value per call).
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Exponential with mean 1 (= squared magnitude of CN(0,1)).
  double exponential() { return -std::log1p(-uniform()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace rrm
