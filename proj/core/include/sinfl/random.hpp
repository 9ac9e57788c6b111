#ifndef SINFL_RANDOM_HPP
#define SINFL_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace sinfl {

/// Seedable 64-bit random stream.
///
/// Satisfies UniformRandomBitGenerator, so it plugs straight into the
/// <random> distributions. Parallel work never shares a source: callers
/// derive child streams with derive() before fanning out, and a child's
/// seed depends only on the parent seed and the derivation path.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed);

  /// Child stream keyed by (seed, path...). Does not advance this stream.
  [[nodiscard]] RandomSource derive(std::initializer_list<std::uint64_t> path) const;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  result_type operator()() { return engine_(); }

  static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
  static constexpr result_type max() noexcept { return std::mt19937_64::max(); }

  /// Uniform real in [0, 1).
  double uniform();

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to hash derivation paths into seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace sinfl

#endif  // SINFL_RANDOM_HPP
