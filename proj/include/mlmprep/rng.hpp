#pragma once

// Seeded randomness with outputs that are identical across standard libraries.
// std::mt19937_64 is fully specified by the standard; the <random>
// distributions are not, so the draws below are done by hand.

#include <cstdint>
#include <random>
#include <string_view>

namespace mlmprep {

inline constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                       std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Stream for one chunk: depends only on (seed, doc_id, seq), never on
  // processing order.
  static Rng for_chunk(std::uint64_t seed, std::string_view doc_id, std::uint64_t seq) {
    std::uint64_t h = splitmix64(seed);
    h = fnv1a64(doc_id, h);
    h = splitmix64(h ^ splitmix64(seq + 1));
    return Rng(h);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n), rejection sampled so there is no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace mlmprep
