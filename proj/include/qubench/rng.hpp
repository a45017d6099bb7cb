#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace qubench {

using Rng = std::mt19937_64;

constexpr std::uint64_t kDefaultMasterSeed = 20230517;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// Stable per-run seed from a master seed and a list of coordinates.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::string_view> coords) {
  std::uint64_t h = splitmix64(master);
  for (auto c : coords) {
    h = splitmix64(h ^ fnv1a(c));
    h = splitmix64(h ^ c.size());
  }
  return h;
}

/// Uniform double in [0, 1) with 53 random bits, independent of the standard
/// library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  std::uint64_t x = rng();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      x = rng();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

template <typename Container>
void shuffle(Container& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

inline std::int8_t random_spin(Rng& rng) {
  return (rng() >> 63) ? std::int8_t{1} : std::int8_t{-1};
}

}  // namespace qubench
