#pragma once

// Deterministic random numbers.
//
// Everything downstream (scene layout, task sampling, injection draws, noisy
// reasoner flips) must reproduce bit-for-bit across platforms and standard
// library versions, so we avoid <random> distributions entirely and keep a
// small splitmix64 generator plus explicit integer/real draws.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace affordsim {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h = kFnvOffset) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Builds a stream key out of mixed string/integer parts, e.g.
// rng_key(seed, "scene", index). Order matters.
inline std::uint64_t rng_key(std::uint64_t seed) { return fnv1a_u64(seed); }

template <typename... Rest>
std::uint64_t rng_key(std::uint64_t seed, std::string_view part, Rest... rest);

template <typename... Rest>
std::uint64_t rng_key(std::uint64_t seed, std::uint64_t part, Rest... rest) {
  return rng_key(fnv1a_u64(part, fnv1a_u64(seed)), rest...);
}

template <typename... Rest>
std::uint64_t rng_key(std::uint64_t seed, std::string_view part, Rest... rest) {
  return rng_key(fnv1a(part, fnv1a_u64(seed)), rest...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so trivially related seeds (0, 1, 2...) diverge immediately.
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Unbiased-enough bounded draw via 128-bit multiply; n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Inclusive integer range.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1).
  double real01() { return (next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return real01() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream; the parent stream is not advanced.
  Rng fork(std::string_view tag) const {
    return Rng(fnv1a(tag, fnv1a_u64(state_)));
  }

 private:
  std::uint64_t state_;
};

}  // namespace affordsim
