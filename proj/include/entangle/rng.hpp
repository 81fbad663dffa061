#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "entangle/hash.hpp"

namespace entangle {

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard for a given seed. Bounded integers and doubles are derived here
/// rather than through <random> distributions, whose algorithms are
/// implementation-defined:
///   - uniform_index(n): rejection sampling on the top of the 64-bit range,
///     then `x % n`.
///   - uniform01(): the top 53 bits scaled by 2^-53.
/// Every stochastic operation takes an Rng& explicitly, so consumption order
/// defines the output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a named purpose derived from a base seed.
  static Rng derive(std::uint64_t seed, std::string_view purpose) {
    return Rng(mix64(seed ^ fnv1a64(purpose)));
  }

  std::uint64_t next_u64() { return engine_(); }

  std::uint64_t uniform_index(std::uint64_t n) {
    // n == 0 is a caller bug; return 0 rather than loop forever.
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Fisher-Yates, iterating from the back.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// `count` distinct values from [0, n) by a partial Fisher-Yates pass.
  /// The result is in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    if (count > n) count = n;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + uniform_index(n - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace entangle
