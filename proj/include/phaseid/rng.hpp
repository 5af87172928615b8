#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace phaseid::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Order-independent hash combine for building noise-stream keys.
inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + kGolden));
}

inline std::uint64_t hash_string(std::string_view s) {
  // FNV-1a, widened through splitmix for better avalanche.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

/// Maps 64 random bits to (0, 1]; never returns 0 so it is safe under log().
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw fully determined by a 64-bit key. Used for
/// measurement noise so that a cell's draw depends only on its identity,
/// never on traversal order.
inline double keyed_normal(std::uint64_t key) {
  const double u1 = unit_open(splitmix64(key ^ 0x2545f4914f6cdd1dULL));
  const double u2 = unit_open(splitmix64(key ^ 0x9e6c63d0a9feae33ULL));
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Small sequential generator for seeded simulation and shuffles.
/// splitmix64 over a Weyl sequence; deterministic across platforms.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return splitmix64(state_);
  }

  /// Uniform in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_normal() {
    const double u1 = unit_open(next_u64());
    const double u2 = unit_open(next_u64());
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift; bias is
  /// negligible for the n used here (shuffles over <1e6 elements).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace phaseid::rng
