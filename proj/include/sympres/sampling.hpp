#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sympres {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Independent substream seed for a named check; stable across refactors
/// of call order.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(base ^ fnv1a64(tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

/// Seeded uniform sampler. Doubles are built from the top 53 bits of
/// mt19937_64 output, so streams are identical on every platform.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sympres
