//
// Copyright 2026 The idblind Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef IDBLIND_RANDOM_HPP
#define IDBLIND_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "idblind/core.hpp"

namespace idblind {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. Every derived quantity is computed from raw engine
/// output so results do not depend on the standard library's distributions.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire-style rejection to remove modulo bias.
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= limit) return r % bound;
    }
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Seed for the i-th shard or trial derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline ArrivalOrder random_order(RandomStream& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return ArrivalOrder(std::move(p));
}

struct RandomInstanceShape {
  std::size_t min_boxes = 1;
  std::size_t max_boxes = 8;
  std::size_t min_support = 1;
  std::size_t max_support = 4;
  // Values are multiples of `value_step` in [0, value_step * value_levels].
  // A dyadic step keeps every value exactly representable.
  std::int64_t value_levels = 16;
  double value_step = 0.25;
};

/// Random instance with dyadic values and probabilities normalized to sum to 1.
inline Instance random_instance(RandomStream& rng, const RandomInstanceShape& shape,
                                std::string name = "random") {
  const auto n = static_cast<std::size_t>(
      rng.between(static_cast<std::int64_t>(shape.min_boxes), static_cast<std::int64_t>(shape.max_boxes)));
  std::vector<DiscreteDistribution> boxes;
  boxes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto want = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(shape.min_support),
                                                           static_cast<std::int64_t>(shape.max_support)));
    const auto k = std::min<std::size_t>(want, static_cast<std::size_t>(shape.value_levels + 1));
    std::vector<std::int64_t> levels;
    while (levels.size() < k) {
      const std::int64_t l = rng.between(0, shape.value_levels);
      if (std::find(levels.begin(), levels.end(), l) == levels.end()) levels.push_back(l);
    }
    std::vector<double> weights(k);
    double total = 0.0;
    for (auto& w : weights) {
      w = 0.05 + rng.uniform01();
      total += w;
    }
    std::vector<Atom> atoms;
    double used = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = j + 1 == k ? 1.0 - used : weights[j] / total;
      used += p;
      atoms.push_back({static_cast<double>(levels[j]) * shape.value_step, p});
    }
    boxes.emplace_back(std::move(atoms));
  }
  return Instance(std::move(boxes), std::move(name));
}

}  // namespace idblind

#endif  // IDBLIND_RANDOM_HPP
