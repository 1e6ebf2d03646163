#pragma once

#include <cstdint>
#include <random>

namespace tailrisk {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded pseudorandom stream. Children obtained with derive() are
/// independent streams keyed by (parent seed, index), so replication i of a
/// Monte Carlo run sees the same numbers regardless of how many
/// replications run or in which order.
class SeededStream {
 public:
  using engine_type = std::mt19937_64;
  static constexpr const char* algorithm = "mt19937_64+splitmix64-derive";

  explicit SeededStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  SeededStream derive(std::uint64_t index) const;

  engine_type& engine() { return engine_; }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform_open();

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

}  // namespace tailrisk
