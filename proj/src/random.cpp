#include "ergkit/random.hpp"

#include <limits>

#include "ergkit/error.hpp"

namespace ergkit {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ArgumentError("Rng::index called with an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the tail that would bias the modulo.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ArgumentError("Rng::between called with hi < lo");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(engine_());
  return lo + static_cast<std::int64_t>(index(static_cast<std::size_t>(span)));
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace ergkit
