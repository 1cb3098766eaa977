#pragma once

#include <cstdint>
#include <string_view>

namespace simhaystack {

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Incremental FNV-1a over bytes, finalised with mix64. Stable across
/// platforms; used to derive per-item seeds.
class SeedHasher {
 public:
  explicit SeedHasher(std::uint64_t base) noexcept;
  SeedHasher& add(std::string_view bytes) noexcept;
  SeedHasher& add(std::uint64_t value) noexcept;
  std::uint64_t digest() const noexcept;

 private:
  std::uint64_t state_;
};

/// xoshiro256** generator with its own uniform and normal draws, so every
/// stream is reproducible independent of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  using result_type = std::uint64_t;
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() noexcept { return next(); }

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace simhaystack
