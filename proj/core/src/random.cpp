#include <sinfl/random.hpp>

#include <stdexcept>

namespace sinfl {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomSource::RandomSource(std::uint64_t seed) : seed_{seed}, engine_{mix64(seed)} {}

RandomSource RandomSource::derive(std::initializer_list<std::uint64_t> path) const {
  std::uint64_t key = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
  for (const auto step : path) {
    key = mix64(key ^ mix64(step + 0x2545f4914f6cdd1dULL));
  }
  return RandomSource{key};
}

double RandomSource::uniform() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RandomSource::index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("RandomSource::index: empty range");
  }
  return std::uniform_int_distribution<std::size_t>{0, n - 1}(*this);
}

}  // namespace sinfl
