// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace trajsql {

std::uint64_t splitmix64(std::uint64_t x);

/// mt19937_64 with distribution helpers implemented here, so draws do not
/// depend on the standard library's distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Independent stream for item `index` under `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform in [0, 1).
  double unit();
  /// Index drawn with probability proportional to `weights`.
  std::size_t weighted(const std::vector<double>& weights);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace trajsql
