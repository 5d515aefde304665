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

#ifndef IDBLIND_CORE_HPP
#define IDBLIND_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace idblind {

// Tolerance on the total mass of a distribution or an order prior.
inline constexpr double kMassTolerance = 1e-12;

/// Raised when an exact computation would exceed its configured size cap.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct Atom {
  double value;
  double prob;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// A finite discrete distribution over nonnegative values.
///
/// Atoms are stored sorted by value with distinct values. Values are compared
/// with exact equality, so callers should build them from exactly
/// representable numbers (integers, dyadic rationals) whenever ties matter.
class DiscreteDistribution {
 public:
  explicit DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("distribution needs at least one atom");
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    double total = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& a = atoms_[i];
      if (!std::isfinite(a.value) || a.value < 0.0)
        throw std::invalid_argument("atom values must be finite and nonnegative");
      if (!(a.prob > 0.0) || a.prob > 1.0)
        throw std::invalid_argument("atom probabilities must lie in (0, 1]");
      if (i > 0 && atoms_[i - 1].value == a.value)
        throw std::invalid_argument("atom values must be distinct");
      total += a.prob;
      cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > kMassTolerance)
      throw std::invalid_argument("atom probabilities must sum to 1");
  }

  static DiscreteDistribution point(double value) { return DiscreteDistribution({{value, 1.0}}); }

  /// `value` with probability `p`, zero otherwise.
  static DiscreteDistribution bernoulli(double value, double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("bernoulli probability must lie in (0, 1]");
    if (value == 0.0 || p == 1.0) return point(value);
    return DiscreteDistribution({{0.0, 1.0 - p}, {value, p}});
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double min_value() const { return atoms_.front().value; }
  double max_value() const { return atoms_.back().value; }
  bool is_point_zero() const { return atoms_.size() == 1 && atoms_[0].value == 0.0; }

  /// Pr[X < v].
  double prob_below(double v) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), v,
                               [](const Atom& a, double x) { return a.value < x; });
    if (it == atoms_.begin()) return 0.0;
    return std::min(1.0, cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1]);
  }

  /// Pr[X <= v].
  double prob_at_most(double v) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), v,
                               [](double x, const Atom& a) { return x < a.value; });
    if (it == atoms_.begin()) return 0.0;
    return std::min(1.0, cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1]);
  }

  /// Pr[X == v].
  double prob_at(double v) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), v,
                               [](const Atom& a, double x) { return a.value < x; });
    return (it != atoms_.end() && it->value == v) ? it->prob : 0.0;
  }

  double mean() const {
    double m = 0.0;
    for (const Atom& a : atoms_) m += a.value * a.prob;
    return m;
  }

  /// Inverse-CDF draw for u in [0, 1).
  double quantile(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) return atoms_.back().value;
    return atoms_[static_cast<std::size_t>(it - cumulative_.begin())].value;
  }

  friend bool operator==(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    return a.atoms_ == b.atoms_;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
};

/// A run of deterministic-zero dummy boxes. The run arrives right after the
/// `after_box`-th explicit arrival (0 means before the first explicit box),
/// whatever the arrival order of the explicit boxes is.
struct ZeroRun {
  std::size_t after_box = 0;
  std::uint64_t count = 0;

  friend bool operator==(const ZeroRun&, const ZeroRun&) = default;
};

/// An ordered collection of independent boxes, optionally padded with
/// compressed runs of deterministic-zero dummies.
class Instance {
 public:
  explicit Instance(std::vector<DiscreteDistribution> boxes, std::string name = {},
                    std::vector<ZeroRun> zero_runs = {})
      : boxes_(std::move(boxes)), name_(std::move(name)) {
    if (boxes_.empty()) throw std::invalid_argument("instance needs at least one box");
    for (const ZeroRun& run : zero_runs) {
      if (run.after_box > boxes_.size())
        throw std::invalid_argument("zero run placed after a nonexistent arrival");
      if (run.count == 0) continue;
      if (dummies_ > std::numeric_limits<std::uint64_t>::max() - run.count)
        throw std::invalid_argument("zero runs overflow the horizon");
      dummies_ += run.count;
      zero_runs_.push_back(run);
    }
    // Canonical form: sorted by position, adjacent runs merged.
    std::stable_sort(zero_runs_.begin(), zero_runs_.end(),
                     [](const ZeroRun& a, const ZeroRun& b) { return a.after_box < b.after_box; });
    std::vector<ZeroRun> merged;
    for (const ZeroRun& run : zero_runs_) {
      if (!merged.empty() && merged.back().after_box == run.after_box)
        merged.back().count += run.count;
      else
        merged.push_back(run);
    }
    zero_runs_ = std::move(merged);
  }

  std::size_t size() const { return boxes_.size(); }
  const DiscreteDistribution& box(std::size_t i) const { return boxes_.at(i); }
  std::span<const DiscreteDistribution> boxes() const { return boxes_; }
  const std::string& name() const { return name_; }
  std::span<const ZeroRun> zero_runs() const { return zero_runs_; }
  std::uint64_t dummy_count() const { return dummies_; }
  std::uint64_t horizon() const { return boxes_.size() + dummies_; }

  /// Number of dummies arriving right after the k-th explicit arrival.
  std::uint64_t zeros_after(std::size_t k) const {
    for (const ZeroRun& run : zero_runs_)
      if (run.after_box == k) return run.count;
    return 0;
  }

  /// Sorted distinct values over all boxes, including 0 when dummies exist.
  std::vector<double> support_union() const {
    std::vector<double> values;
    for (const auto& b : boxes_)
      for (const Atom& a : b.atoms()) values.push_back(a.value);
    if (dummies_ > 0) values.push_back(0.0);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
  }

  /// log10 of the product of explicit support sizes.
  double log10_outcomes() const {
    double s = 0.0;
    for (const auto& b : boxes_) s += std::log10(static_cast<double>(b.size()));
    return s;
  }

  Instance with_name(std::string name) const {
    Instance copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  std::vector<DiscreteDistribution> boxes_;
  std::string name_;
  std::vector<ZeroRun> zero_runs_;
  std::uint64_t dummies_ = 0;
};

/// perm[i] is the (0-based) identity of the i-th arriving explicit box.
/// File formats use 1-based indices; see io.hpp.
class ArrivalOrder {
 public:
  explicit ArrivalOrder(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
    std::vector<char> seen(perm_.size(), 0);
    for (std::size_t b : perm_) {
      if (b >= perm_.size() || seen[b]) throw std::invalid_argument("arrival order is not a permutation");
      seen[b] = 1;
    }
  }

  static ArrivalOrder identity(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    return ArrivalOrder(std::move(p));
  }

  static ArrivalOrder reversed(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = n - 1 - i;
    return ArrivalOrder(std::move(p));
  }

  std::size_t size() const { return perm_.size(); }
  std::size_t operator[](std::size_t i) const { return perm_[i]; }
  std::span<const std::size_t> perm() const { return perm_; }

  friend bool operator==(const ArrivalOrder&, const ArrivalOrder&) = default;
  friend auto operator<=>(const ArrivalOrder&, const ArrivalOrder&) = default;

 private:
  std::vector<std::size_t> perm_;
};

struct WeightedOrder {
  ArrivalOrder order;
  double prob;
};

/// A finitely supported distribution over arrival orders of the same length.
class OrderPrior {
 public:
  explicit OrderPrior(std::vector<WeightedOrder> support) : support_(std::move(support)) {
    if (support_.empty()) throw std::invalid_argument("order prior is empty");
    double total = 0.0;
    for (const auto& w : support_) {
      if (w.order.size() != support_.front().order.size())
        throw std::invalid_argument("order prior mixes orders of different lengths");
      if (!(w.prob > 0.0)) throw std::invalid_argument("order prior probabilities must be positive");
      total += w.prob;
    }
    if (std::abs(total - 1.0) > kMassTolerance)
      throw std::invalid_argument("order prior probabilities must sum to 1");
  }

  static OrderPrior uniform(std::vector<ArrivalOrder> orders) {
    std::vector<WeightedOrder> s;
    const double p = 1.0 / static_cast<double>(orders.size());
    for (auto& o : orders) s.push_back({std::move(o), p});
    return OrderPrior(std::move(s));
  }

  std::span<const WeightedOrder> support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  std::size_t order_length() const { return support_.front().order.size(); }

 private:
  std::vector<WeightedOrder> support_;
};

inline void check_compatible(const Instance& instance, const ArrivalOrder& order) {
  if (order.size() != instance.size())
    throw std::invalid_argument("arrival order length does not match the number of boxes");
}

/// An explicit arrival on a timeline.
struct Slot {
  std::uint64_t time;  // 1-based arrival time
  std::size_t box;     // 0-based identity
  const DiscreteDistribution* dist;
};

/// The arrival sequence an (instance, order) pair induces: explicit arrivals
/// with their times; every other time in 1..horizon is a deterministic zero.
/// Holds pointers into the instance, which must outlive it.
class Timeline {
 public:
  Timeline(const Instance& instance, const ArrivalOrder& order) : horizon_(instance.horizon()) {
    check_compatible(instance, order);
    std::uint64_t t = instance.zeros_after(0);
    for (std::size_t k = 0; k < order.size(); ++k) {
      ++t;
      slots_.push_back({t, order[k], &instance.box(order[k])});
      t += instance.zeros_after(k + 1);
    }
  }

  std::span<const Slot> slots() const { return slots_; }
  std::uint64_t horizon() const { return horizon_; }
  bool has_dummies() const { return horizon_ > slots_.size(); }

  /// Dummy-zero times strictly between slot j-1 and slot j (j == slots().size()
  /// gives the trailing run).
  std::uint64_t gap_before(std::size_t j) const {
    const std::uint64_t prev = j == 0 ? 0 : slots_[j - 1].time;
    const std::uint64_t next = j == slots_.size() ? horizon_ + 1 : slots_[j].time;
    return next - prev - 1;
  }

 private:
  std::vector<Slot> slots_;
  std::uint64_t horizon_;
};

/// Materializes dummies as explicit point-zero boxes (appended after the
/// explicit boxes) together with the matching full arrival order.
inline std::pair<Instance, ArrivalOrder> expand(const Instance& instance, const ArrivalOrder& order,
                                                std::uint64_t cap = 10'000'000) {
  check_compatible(instance, order);
  if (instance.horizon() > cap) throw SizeLimitError("expansion exceeds the configured cap");
  std::vector<DiscreteDistribution> boxes(instance.boxes().begin(), instance.boxes().end());
  std::vector<std::size_t> perm;
  perm.reserve(static_cast<std::size_t>(instance.horizon()));
  auto push_zeros = [&](std::uint64_t c) {
    for (std::uint64_t i = 0; i < c; ++i) {
      perm.push_back(boxes.size());
      boxes.push_back(DiscreteDistribution::point(0.0));
    }
  };
  push_zeros(instance.zeros_after(0));
  for (std::size_t k = 0; k < order.size(); ++k) {
    perm.push_back(order[k]);
    push_zeros(instance.zeros_after(k + 1));
  }
  return {Instance(std::move(boxes), instance.name()), ArrivalOrder(std::move(perm))};
}

// ---------------------------------------------------------------------------
// Statistics of the maximum value. Dummies never change these: they only add
// a zero that every nonnegative box already dominates.

/// Pr[max_i v_i < tau] when strict, Pr[max_i v_i <= tau] otherwise.
inline double max_cdf(const Instance& instance, double tau, bool strict) {
  if (tau < 0.0) throw std::invalid_argument("max_cdf needs tau >= 0");
  double p = 1.0;
  for (const auto& b : instance.boxes()) p *= strict ? b.prob_below(tau) : b.prob_at_most(tau);
  return std::clamp(p, 0.0, 1.0);
}

/// E[max_i v_i], by summing over the union of support values.
inline double expected_max(const Instance& instance) {
  double result = 0.0, prev = 0.0;
  for (double v : instance.support_union()) {
    const double cdf = max_cdf(instance, v, false);
    result += v * (cdf - prev);
    prev = cdf;
  }
  return result;
}

/// max_v Pr[max_i v_i = v].
inline double max_point_mass(const Instance& instance) {
  double best = 0.0, prev = 0.0;
  for (double v : instance.support_union()) {
    const double cdf = max_cdf(instance, v, false);
    best = std::max(best, cdf - prev);
    prev = cdf;
  }
  return best;
}

/// Pr[max_i v_i = 0]; reports flag instances where the zero-max corner matters.
inline double zero_max_mass(const Instance& instance) { return max_cdf(instance, 0.0, false); }

}  // namespace idblind

#endif  // IDBLIND_CORE_HPP
