#include "tailrisk/random.hpp"

namespace tailrisk {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeededStream::SeededStream(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

SeededStream SeededStream::derive(std::uint64_t index) const {
  return SeededStream(splitmix64(splitmix64(seed_) ^ splitmix64(~index)));
}

double SeededStream::uniform_open() {
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace tailrisk
