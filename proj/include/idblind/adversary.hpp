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

#ifndef IDBLIND_ADVERSARY_HPP
#define IDBLIND_ADVERSARY_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "idblind/constants.hpp"
#include "idblind/core.hpp"
#include "idblind/policy.hpp"
#include "idblind/random.hpp"

namespace idblind {

namespace detail {

inline void require_unit_open(double x, const char* what) {
  if (!(x > 0.0) || !(x < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
}

}  // namespace detail

struct InstanceWithOrders {
  Instance instance;
  std::vector<ArrivalOrder> orders;
};

/// Boxes {0}, {mid}, {1/eps w.p. eps, else 0}; orders (1,2,3) and (3,2,1).
inline InstanceWithOrders example1(double mid, double epsilon) {
  detail::require_unit_open(mid, "mid");
  detail::require_unit_open(epsilon, "epsilon");
  Instance inst({DiscreteDistribution::point(0.0), DiscreteDistribution::point(mid),
                 DiscreteDistribution::bernoulli(1.0 / epsilon, epsilon)},
                "example1");
  return {std::move(inst), {ArrivalOrder::identity(3), ArrivalOrder::reversed(3)}};
}

/// Box i (1-based) takes value i with probability eps, 0 otherwise.
inline Instance bernoulli_ladder(std::size_t n, double epsilon) {
  if (n < 1) throw std::invalid_argument("ladder needs n >= 1");
  detail::require_unit_open(epsilon, "epsilon");
  std::vector<DiscreteDistribution> boxes;
  boxes.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) boxes.push_back(DiscreteDistribution::bernoulli(static_cast<double>(i), epsilon));
  return Instance(std::move(boxes), "ladder");
}

/// eps with (1 - eps)^n = mass.
inline double epsilon_for_mass(std::size_t n, double mass) {
  detail::require_unit_open(mass, "mass");
  return -std::expm1(std::log(mass) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Max-expectation hardness family.
//
// Box layout (0-based): [0, n) deterministic zeros, [n, 2n) Bernoulli {1 w.p.
// 1/2}, 2n the free-reward box {1/eps w.p. eps}, 2n+1 the deterministic 1.

inline constexpr std::size_t kHardnessPriorCap = 12;

/// Arrival order for the bit vector x (bit i-1 of `x` is x_i). Same-type
/// boxes are matched to positions in index order.
inline ArrivalOrder maxexp_hardness_order(std::size_t n, std::uint64_t x) {
  std::vector<std::size_t> perm;
  perm.reserve(2 * n + 2);
  std::size_t next_zero = 0, next_bern = n;
  for (std::size_t i = 0; i < n; ++i) perm.push_back((x >> i) & 1 ? next_bern++ : next_zero++);
  while (next_bern < 2 * n) perm.push_back(next_bern++);
  perm.push_back(2 * n);
  perm.push_back(2 * n + 1);
  while (next_zero < n) perm.push_back(next_zero++);
  return ArrivalOrder(std::move(perm));
}

/// 1-based arrival time of the deterministic 1 under pi_x.
inline std::size_t maxexp_hardness_unit_time(std::size_t n, std::uint64_t x) {
  return 2 * n + 2 - static_cast<std::size_t>(std::popcount(x));
}

inline Instance maxexp_hardness_instance(std::size_t n, double epsilon) {
  if (n < 1) throw std::invalid_argument("hardness family needs n >= 1");
  detail::require_unit_open(epsilon, "epsilon");
  std::vector<DiscreteDistribution> boxes;
  for (std::size_t i = 0; i < n; ++i) boxes.push_back(DiscreteDistribution::point(0.0));
  for (std::size_t i = 0; i < n; ++i) boxes.push_back(DiscreteDistribution::bernoulli(1.0, 0.5));
  boxes.push_back(DiscreteDistribution::bernoulli(1.0 / epsilon, epsilon));
  boxes.push_back(DiscreteDistribution::point(1.0));
  return Instance(std::move(boxes), "maxexp_hardness");
}

struct HardnessFamily {
  Instance instance;
  OrderPrior prior;
  std::vector<std::uint64_t> bits;  // x for each prior support point
};

/// Instance plus the uniform prior over all 2^n orders pi_x.
inline HardnessFamily maxexp_hardness(std::size_t n, double epsilon, std::size_t cap = kHardnessPriorCap) {
  if (n > cap) throw std::invalid_argument("full prior over 2^n orders exceeds the cap; use the sampled variant");
  std::vector<ArrivalOrder> orders;
  std::vector<std::uint64_t> bits;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    orders.push_back(maxexp_hardness_order(n, x));
    bits.push_back(x);
  }
  return {maxexp_hardness_instance(n, epsilon), OrderPrior::uniform(std::move(orders)), std::move(bits)};
}

/// Uniform prior over `samples` distinct bit vectors drawn with `seed`.
inline HardnessFamily maxexp_hardness_sampled(std::size_t n, double epsilon, std::size_t samples,
                                              std::uint64_t seed) {
  if (n > 62) throw std::invalid_argument("sampled hardness family supports n <= 62");
  const std::uint64_t space = std::uint64_t{1} << n;
  if (samples < 1 || samples > space) throw std::invalid_argument("sample count must lie in [1, 2^n]");
  RandomStream rng(seed);
  std::set<std::uint64_t> chosen;
  while (chosen.size() < samples) chosen.insert(rng.below(space));
  std::vector<ArrivalOrder> orders;
  std::vector<std::uint64_t> bits(chosen.begin(), chosen.end());
  for (std::uint64_t x : bits) orders.push_back(maxexp_hardness_order(n, x));
  return {maxexp_hardness_instance(n, epsilon), OrderPrior::uniform(std::move(orders)), std::move(bits)};
}

// ---------------------------------------------------------------------------
// Single-threshold hardness on the ladder.

/// n + 1 - log_{1-eps}(target), rounded to the nearest integer.
inline long theorem3_t_star(std::size_t n, double epsilon, double target) {
  return std::lround(static_cast<double>(n) + 1.0 - std::log(target) / std::log1p(-epsilon));
}

/// Boxes T..T*-1 ascending, then n..T* descending, then T-1..1 descending.
/// Requires T < T* <= n + 1.
inline ArrivalOrder theorem3_case1a(std::size_t n, std::size_t T, long t_star) {
  if (T < 1 || T > n) throw std::invalid_argument("threshold position must lie in [1, n]");
  if (t_star <= static_cast<long>(T) || t_star > static_cast<long>(n) + 1)
    throw std::out_of_range("T* outside (T, n+1]; use the descending order");
  const auto ts = static_cast<std::size_t>(t_star);
  std::vector<std::size_t> perm;
  for (std::size_t b = T; b < ts; ++b) perm.push_back(b - 1);
  for (std::size_t b = n; b >= ts; --b) perm.push_back(b - 1);
  for (std::size_t b = T - 1; b >= 1; --b) perm.push_back(b - 1);
  return ArrivalOrder(std::move(perm));
}

/// Boxes T..n ascending, then T-1..1 descending.
inline ArrivalOrder theorem3_case2(std::size_t n, std::size_t T) {
  if (T < 1 || T > n) throw std::invalid_argument("threshold position must lie in [1, n]");
  std::vector<std::size_t> perm;
  for (std::size_t b = T; b <= n; ++b) perm.push_back(b - 1);
  for (std::size_t b = T - 1; b >= 1; --b) perm.push_back(b - 1);
  return ArrivalOrder(std::move(perm));
}

struct Theorem3Orders {
  std::optional<ArrivalOrder> case1a;  // empty when T* <= T
  ArrivalOrder case1b;
  ArrivalOrder case2;
  long t_star_case1;  // from lambda*/rho*
  long t_star_case2;  // from 1/e
};

inline Theorem3Orders theorem3_orders(std::size_t n, double epsilon, std::size_t T) {
  const GapConstants& c = gap_constants();
  const long t1 = theorem3_t_star(n, epsilon, c.lambda_star / c.rho_star);
  const long t2 = theorem3_t_star(n, epsilon, inv_e());
  std::optional<ArrivalOrder> a;
  if (t1 > static_cast<long>(T) && t1 <= static_cast<long>(n) + 1) a = theorem3_case1a(n, T, t1);
  return {std::move(a), ArrivalOrder::reversed(n), theorem3_case2(n, T), t1, t2};
}

/// Exact win probabilities on the ladder for the threshold T (ties accepted)
/// and for the skip-then-greedy benchmarks that also accept the last arrival.
struct Theorem3Formulas {
  static double pw(double base, long e) { return std::pow(base, static_cast<double>(e)); }

  static double case2_alg(std::size_t n, double eps, std::size_t T) {
    return static_cast<double>(n - T + 1) * eps * pw(1.0 - eps, static_cast<long>(n - T));
  }
  /// Skip boxes T..T*-1, then greedy: exactly one of T*..n realized, or none of T..n.
  static double case2_opt_bound(std::size_t n, double eps, std::size_t T, long t_star) {
    const long ts = std::max<long>(t_star, static_cast<long>(T));
    const long top = static_cast<long>(n) - ts + 1;
    return static_cast<double>(top) * eps * pw(1.0 - eps, top - 1) + pw(1.0 - eps, static_cast<long>(n - T + 1));
  }
  static double case1a_alg(std::size_t n, double eps, std::size_t T, long t_star) {
    const long mid = t_star - static_cast<long>(T);
    return static_cast<double>(mid) * eps * pw(1.0 - eps, static_cast<long>(n - T)) +
           pw(1.0 - eps, mid) * (1.0 - pw(1.0 - eps, static_cast<long>(n) - t_star + 1));
  }
  /// Skip boxes T..T*-1, then greedy; the last arrival is accepted if reached.
  /// With T = 1 and T* = n + 1 the last arrival is box n itself.
  static double case1a_opt_bound(std::size_t n, double eps, std::size_t T, long t_star) {
    const double last_is_top = (T == 1 && t_star == static_cast<long>(n) + 1) ? eps : 0.0;
    return (1.0 - pw(1.0 - eps, static_cast<long>(n) - t_star + 1)) +
           (1.0 - pw(1.0 - eps, static_cast<long>(T) - 1)) * pw(1.0 - eps, static_cast<long>(n - T + 1)) +
           pw(1.0 - eps, static_cast<long>(n)) + last_is_top;
  }
  static double case1b_alg(std::size_t n, double eps, std::size_t T) {
    return 1.0 - pw(1.0 - eps, static_cast<long>(n - T + 1));
  }
};

// ---------------------------------------------------------------------------
// Adaptive adversary against a deterministic identity-blind policy.

class NondeterministicPolicy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdversaryProbe {
  std::size_t box;         // probe value k (1-based box)
  std::uint64_t time;      // i_k
  std::uint64_t lower;     // l before the probe
  std::uint64_t upper;     // u before the probe
  bool accepted;
  int stage;               // 1 or 2
};

struct AdversaryTranscript {
  std::vector<AdversaryProbe> probes;
  std::vector<std::size_t> accepted;  // A, ascending
  std::vector<std::size_t> rejected;  // R, ascending by box
  std::vector<std::size_t> tail;      // B, in arrival order
  bool few_accepts = false;           // |A| < a after the first stage
  long a = 0, t1 = 0, t2 = 0;
};

struct AdversaryResult {
  Instance instance;
  ArrivalOrder order;
  AdversaryTranscript transcript;
};

inline constexpr std::size_t kAdversaryMaxN = 62;

/// Builds the ladder over 2^n time positions (n real boxes, the rest
/// deterministic zeros) by binary search on the policy's zero-prefix
/// decisions. The tail set B occupies the positions right after the final
/// lower index l, which keeps A -> B -> R strictly ordered in time.
inline AdversaryResult adaptive_adversary(const Policy& policy, std::size_t n, double epsilon,
                                          std::uint64_t cap = 10'000'000, std::size_t max_n = kAdversaryMaxN) {
  if (n < 1 || n > std::min(max_n, kAdversaryMaxN)) throw std::invalid_argument("adversary n outside [1, cap]");
  detail::require_unit_open(epsilon, "epsilon");
  const std::uint64_t positions = std::uint64_t{1} << n;
  if (!policy.rejects_zeros() && !policy.time_invariant() && positions - n > cap)
    throw SizeLimitError("policy may accept zeros and the dummy runs exceed the expansion cap");

  const GapConstants& c = gap_constants();
  AdversaryTranscript tr;
  tr.a = static_cast<long>(std::floor((std::log(1.0 / c.lambda_star) - 1.0) / epsilon));
  tr.t1 = static_cast<long>(std::floor(1.0 / epsilon));
  tr.t2 = static_cast<long>(std::floor(std::log(c.rho_star / c.lambda_star) / epsilon));
  const long ln = static_cast<long>(n);

  std::uint64_t lo = 0, hi = positions;
  std::vector<std::uint64_t> time_of(n + 1, 0);
  auto probe = [&](long k, int stage) {
    const std::uint64_t t = (lo + hi) / 2;
    ValueHistory history;
    history.push(0.0, t - 1);
    const double p1 = policy.accept_probability(t, static_cast<double>(k), history);
    const double p2 = policy.accept_probability(t, static_cast<double>(k), history);
    if (p1 != p2 || (p1 != 0.0 && p1 != 1.0))
      throw NondeterministicPolicy("policy '" + policy.name() + "' is randomized at probe time " + std::to_string(t));
    const bool accept = p1 == 1.0;
    tr.probes.push_back({static_cast<std::size_t>(k), t, lo, hi, accept, stage});
    time_of[static_cast<std::size_t>(k)] = t;
    if (accept) {
      lo = t;
      tr.accepted.push_back(static_cast<std::size_t>(k));
    } else {
      hi = t;
      tr.rejected.push_back(static_cast<std::size_t>(k));
    }
  };

  for (long k = 1; k <= ln - tr.t1; ++k) probe(k, 1);
  tr.few_accepts = static_cast<long>(tr.accepted.size()) < tr.a;
  const long first_free = std::max<long>(1, ln - tr.t1 + 1);
  if (tr.few_accepts) {
    for (long k = first_free; k <= ln - tr.t2; ++k) probe(k, 2);
    const long b_lo = std::max<long>(first_free, ln - tr.t2 + 1);
    for (long k = ln; k >= b_lo; --k) tr.tail.push_back(static_cast<std::size_t>(k));
  } else {
    for (long k = first_free; k <= ln; ++k) tr.tail.push_back(static_cast<std::size_t>(k));
  }
  for (std::size_t i = 0; i < tr.tail.size(); ++i) time_of[tr.tail[i]] = lo + 1 + i;
  if (!tr.tail.empty() && lo + tr.tail.size() >= hi)
    throw std::logic_error("tail boxes collide with the rejected block");

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t x, std::size_t y) { return time_of[x + 1] < time_of[y + 1]; });
  std::vector<ZeroRun> runs;
  std::uint64_t prev = 0;
  for (std::size_t m = 0; m < n; ++m) {
    const std::uint64_t t = time_of[perm[m] + 1];
    if (t > prev + 1) runs.push_back({m, t - prev - 1});
    prev = t;
  }
  if (positions > prev) runs.push_back({n, positions - prev});

  std::vector<DiscreteDistribution> boxes;
  for (std::size_t i = 1; i <= n; ++i) boxes.push_back(DiscreteDistribution::bernoulli(static_cast<double>(i), epsilon));
  Instance inst(std::move(boxes), "adversary", std::move(runs));
  return {std::move(inst), ArrivalOrder(std::move(perm)), std::move(tr)};
}

// ---------------------------------------------------------------------------
// Point-mass impossibility instances.

struct AppendixInstances {
  InstanceWithOrders det_claim;        // orders: {dummies, 0.5, ladder desc}, {ladder asc, 0.5, dummies}
  InstanceWithOrders threshold_claim;  // orders: {0.5, ladder asc, 0.5}, {0.5, ladder desc, 0.5}
};

/// Box layout: det_claim has the ladder at [0, n), the 0.5 box at n and n
/// explicit zero dummies at [n+1, 2n]; threshold_claim has the ladder at
/// [0, n) and the two 0.5 boxes at n and n+1.
inline AppendixInstances appendix_instances(std::size_t n, double epsilon) {
  const Instance ladder = bernoulli_ladder(n, epsilon);
  std::vector<DiscreteDistribution> det(ladder.boxes().begin(), ladder.boxes().end());
  det.push_back(DiscreteDistribution::point(0.5));
  for (std::size_t i = 0; i < n; ++i) det.push_back(DiscreteDistribution::point(0.0));
  std::vector<std::size_t> c1, c2;
  for (std::size_t i = n + 1; i <= 2 * n; ++i) c1.push_back(i);
  c1.push_back(n);
  for (std::size_t i = n; i-- > 0;) c1.push_back(i);
  for (std::size_t i = 0; i < n; ++i) c2.push_back(i);
  c2.push_back(n);
  for (std::size_t i = n + 1; i <= 2 * n; ++i) c2.push_back(i);

  std::vector<DiscreteDistribution> thr(ladder.boxes().begin(), ladder.boxes().end());
  thr.push_back(DiscreteDistribution::point(0.5));
  thr.push_back(DiscreteDistribution::point(0.5));
  std::vector<std::size_t> up{n}, down{n};
  for (std::size_t i = 0; i < n; ++i) up.push_back(i);
  for (std::size_t i = n; i-- > 0;) down.push_back(i);
  up.push_back(n + 1);
  down.push_back(n + 1);

  return {{Instance(std::move(det), "appendix_det"), {ArrivalOrder(std::move(c1)), ArrivalOrder(std::move(c2))}},
          {Instance(std::move(thr), "appendix_threshold"), {ArrivalOrder(std::move(up)), ArrivalOrder(std::move(down))}}};
}

}  // namespace idblind

#endif  // IDBLIND_ADVERSARY_HPP
