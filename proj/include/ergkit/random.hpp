#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ergkit {

/// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Seeded generator whose output sequence is identical on every platform.
/// std::mt19937_64 is fully specified by the standard; the standard
/// distributions are not, so bounded draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Uniform in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Uniform in [0, 1) with 53 random bits.
  double unit();

  bool chance(double p) { return unit() < p; }

  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  template <class T>
  const T& pick(const std::vector<T>& items) {
    return items[index(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ergkit
