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

#ifndef IDBLIND_POLICY_HPP
#define IDBLIND_POLICY_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "idblind/constants.hpp"
#include "idblind/core.hpp"
#include "idblind/random.hpp"

namespace idblind {

enum class Objective { max_exp, max_prob };

inline const char* to_string(Objective o) { return o == Objective::max_exp ? "max_exp" : "max_prob"; }

inline Objective parse_objective(const std::string& s) {
  if (s == "max_exp") return Objective::max_exp;
  if (s == "max_prob") return Objective::max_prob;
  throw std::invalid_argument("unknown objective '" + s + "' (expected max_exp or max_prob)");
}

/// Run-length encoded sequence of observed values.
///
/// Histories of the black-box adversary contain up to 2^n leading zeros, so
/// they are never materialized value by value.
class ValueHistory {
 public:
  struct Run {
    double value;
    std::uint64_t count;
    std::uint64_t end;       // total length through this run
    std::uint64_t nonzeros;  // nonzero values through this run
    double max;              // running maximum through this run
  };

  void push(double value, std::uint64_t count = 1) {
    if (count == 0) return;
    if (!runs_.empty() && runs_.back().value == value) {
      Run& r = runs_.back();
      r.count += count;
      r.end += count;
      if (value != 0.0) r.nonzeros += count;
      return;
    }
    const Run* last = runs_.empty() ? nullptr : &runs_.back();
    runs_.push_back({value, count, (last ? last->end : 0) + count,
                     (last ? last->nonzeros : 0) + (value != 0.0 ? count : 0),
                     last ? std::max(last->max, value) : value});
  }

  /// Removes the last `count` values.
  void pop(std::uint64_t count = 1) {
    while (count > 0) {
      if (runs_.empty()) throw std::out_of_range("pop from empty history");
      Run& r = runs_.back();
      const std::uint64_t take = std::min(count, r.count);
      r.count -= take;
      r.end -= take;
      if (r.value != 0.0) r.nonzeros -= take;
      count -= take;
      if (r.count == 0) runs_.pop_back();
    }
  }

  void clear() { runs_.clear(); }

  std::uint64_t size() const { return runs_.empty() ? 0 : runs_.back().end; }
  bool empty() const { return runs_.empty(); }
  double back() const { return runs_.back().value; }
  /// Maximum observed value, 0 for an empty history.
  double max() const { return runs_.empty() ? 0.0 : runs_.back().max; }
  std::uint64_t nonzero_count() const { return runs_.empty() ? 0 : runs_.back().nonzeros; }
  bool all_zero() const { return nonzero_count() == 0; }
  std::span<const Run> runs() const { return runs_; }

  std::vector<double> expand() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (const Run& r : runs_) out.insert(out.end(), static_cast<std::size_t>(r.count), r.value);
    return out;
  }

  /// Nonzero values in arrival order.
  std::vector<double> nonzero_values() const {
    std::vector<double> out;
    for (const Run& r : runs_)
      if (r.value != 0.0) out.insert(out.end(), static_cast<std::size_t>(r.count), r.value);
    return out;
  }

 private:
  std::vector<Run> runs_;
};

/// An online selection rule.
///
/// Identity-blind by construction: the rule sees the arrival time, the value
/// just revealed and the values revealed so far, never box identities.
/// Implementations must be safe to call concurrently.
class Policy {
 public:
  virtual ~Policy() = default;

  /// Probability of accepting `value` at time `t` (1-based) after `history`
  /// (the values at times 1..t-1).
  virtual double accept_probability(std::uint64_t t, double value, const ValueHistory& history) const = 0;

  /// Declares that zero values are never accepted. Evaluators then skip runs
  /// of dummy zeros without querying the policy.
  virtual bool rejects_zeros() const { return false; }

  /// Declares that accept_probability is always 0 or 1.
  virtual bool is_deterministic() const { return true; }

  /// Declares that accept_probability ignores the history, which unlocks the
  /// sweep evaluator.
  virtual bool history_free() const { return false; }

  /// Declares that accept_probability depends on the value alone. Runs of
  /// dummy zeros are then folded in closed form.
  virtual bool time_invariant() const { return false; }

  /// Objective the policy was built for, if any.
  virtual std::optional<Objective> objective_tag() const { return std::nullopt; }

  virtual std::string name() const = 0;

  virtual nlohmann::json describe() const { return {{"kind", "opaque"}, {"name", name()}}; }

  /// Samples a decision. Deterministic decisions consume no randomness.
  bool decide(std::uint64_t t, double value, const ValueHistory& history, RandomStream& rng) const {
    const double p = accept_probability(t, value, history);
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return rng.uniform01() < p;
  }
};

/// Accepts values above `tau`, rejects values below it and accepts a value
/// equal to `tau` with probability `xi`, independently per arrival.
class ThresholdPolicy final : public Policy {
 public:
  ThresholdPolicy(double tau, double xi, std::optional<Objective> objective = std::nullopt,
                  std::string label = "threshold")
      : tau_(tau), xi_(xi), objective_(objective), label_(std::move(label)) {
    if (!std::isfinite(tau) || tau < 0.0) throw std::invalid_argument("threshold must be finite and >= 0");
    if (!(xi >= 0.0 && xi <= 1.0)) throw std::invalid_argument("tie acceptance must lie in [0, 1]");
  }

  double tau() const { return tau_; }
  double xi() const { return xi_; }

  double accept_probability(std::uint64_t, double value, const ValueHistory&) const override {
    if (value > tau_) return 1.0;
    if (value < tau_) return 0.0;
    return xi_;
  }
  bool rejects_zeros() const override { return tau_ > 0.0 || xi_ == 0.0; }
  bool is_deterministic() const override { return xi_ == 0.0 || xi_ == 1.0; }
  bool history_free() const override { return true; }
  bool time_invariant() const override { return true; }
  std::optional<Objective> objective_tag() const override { return objective_; }
  std::string name() const override { return label_; }

  nlohmann::json describe() const override {
    nlohmann::json j = {{"kind", "threshold"}, {"tau", tau_}, {"xi", xi_}};
    if (objective_) j["objective"] = to_string(*objective_);
    return j;
  }

 private:
  double tau_;
  double xi_;
  std::optional<Objective> objective_;
  std::string label_;
};

/// Tie mass split at a candidate threshold: p_i = Pr[v_i < tau] and
/// q_i = Pr[v_i = tau] for every box, dummies folded in as a power.
struct TieSplit {
  std::vector<double> below;
  std::vector<double> at;
  std::uint64_t dummies_at = 0;  // dummies contribute q = 1 when tau == 0

  /// Probability that no arrival passes the threshold when ties pass with
  /// probability `xi`: prod_i (p_i + (1 - xi) q_i).
  double no_pass(double xi) const {
    double f = 1.0;
    for (std::size_t i = 0; i < below.size(); ++i) f *= below[i] + (1.0 - xi) * at[i];
    if (dummies_at > 0) f *= std::pow(1.0 - xi, static_cast<double>(dummies_at));
    return f;
  }
};

inline TieSplit tie_split(const Instance& instance, double tau) {
  TieSplit s;
  for (const auto& b : instance.boxes()) {
    s.below.push_back(b.prob_below(tau));
    s.at.push_back(b.prob_at(tau));
  }
  if (tau == 0.0) s.dummies_at = instance.dummy_count();
  return s;
}

/// Probability that `policy` accepts nothing on the instance, in any order.
inline double no_pass_probability(const Instance& instance, const ThresholdPolicy& policy) {
  return tie_split(instance, policy.tau()).no_pass(policy.xi());
}

/// Threshold whose no-acceptance probability is exactly `lambda_target`.
///
/// tau is the largest support value with Pr[max < tau] <= lambda, so that
/// Pr[max < tau] <= lambda <= Pr[max <= tau]. The tie acceptance xi then solves
/// prod_i (p_i + (1 - xi) q_i) = lambda by bisection on this decreasing
/// function; xi = 1 when the threshold carries no tie mass to spread.
inline ThresholdPolicy find_threshold(const Instance& instance, double lambda_target,
                                      std::optional<Objective> objective = std::nullopt,
                                      std::string label = "threshold") {
  if (!(lambda_target > 0.0) || !(lambda_target < 1.0))
    throw std::invalid_argument("threshold target must lie in (0, 1)");
  const std::vector<double> values = instance.support_union();
  double tau = values.front();
  for (double v : values) {
    if (max_cdf(instance, v, /*strict=*/true) <= lambda_target)
      tau = v;
    else
      break;
  }
  const TieSplit split = tie_split(instance, tau);
  const double f_accept_all = split.no_pass(1.0);  // Pr[max < tau]
  const double f_reject_all = split.no_pass(0.0);  // Pr[max <= tau]
  if (!(f_reject_all > f_accept_all)) return ThresholdPolicy(tau, 1.0, objective, std::move(label));
  double lo = 0.0, hi = 1.0;  // no_pass(lo) >= lambda >= no_pass(hi)
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (split.no_pass(mid) >= lambda_target)
      lo = mid;
    else
      hi = mid;
  }
  const double xi = std::abs(split.no_pass(lo) - lambda_target) <= std::abs(split.no_pass(hi) - lambda_target)
                        ? lo
                        : hi;
  return ThresholdPolicy(tau, xi, objective, std::move(label));
}

/// The max-probability threshold with no-acceptance probability lambda*.
inline ThresholdPolicy theorem2_policy(const Instance& instance) {
  return find_threshold(instance, gap_constants().lambda_star, Objective::max_prob, "theorem2");
}

/// Median rule for the max-expectation objective.
inline ThresholdPolicy prophet_half_policy(const Instance& instance) {
  return find_threshold(instance, 0.5, Objective::max_exp, "prophet_half");
}

/// Classic max-probability threshold with no-acceptance probability 1/e.
inline ThresholdPolicy one_over_e_policy(const Instance& instance) {
  return find_threshold(instance, inv_e(), Objective::max_prob, "one_over_e");
}

/// Accepts the first positive value.
inline ThresholdPolicy greedy_positive_policy() { return ThresholdPolicy(0.0, 0.0, std::nullopt, "greedy"); }

/// Rejects the first `skip` arrivals, then accepts the first positive value.
/// With `accept_at` set, also accepts whatever arrives at that time.
class SkipThenGreedyPolicy final : public Policy {
 public:
  explicit SkipThenGreedyPolicy(std::uint64_t skip, std::optional<std::uint64_t> accept_at = std::nullopt)
      : skip_(skip), accept_at_(accept_at) {}

  double accept_probability(std::uint64_t t, double value, const ValueHistory&) const override {
    if (accept_at_ && t == *accept_at_) return 1.0;
    return (t > skip_ && value > 0.0) ? 1.0 : 0.0;
  }
  bool rejects_zeros() const override { return !accept_at_.has_value(); }
  bool history_free() const override { return true; }
  std::string name() const override { return "skip" + std::to_string(skip_) + "_greedy"; }
  nlohmann::json describe() const override {
    nlohmann::json j = {{"kind", "skip_greedy"}, {"skip", skip_}};
    if (accept_at_) j["accept_at"] = *accept_at_;
    return j;
  }

 private:
  std::uint64_t skip_;
  std::optional<std::uint64_t> accept_at_;
};

/// Policy defined by a callable, for hand-written rules.
class FunctionPolicy final : public Policy {
 public:
  using Rule = std::function<double(std::uint64_t t, double value, const ValueHistory& history)>;

  struct Traits {
    bool rejects_zeros = false;
    bool deterministic = true;
    bool history_free = false;
    bool time_invariant = false;
  };

  FunctionPolicy(std::string name, Rule rule, Traits traits) : name_(std::move(name)), rule_(std::move(rule)), traits_(traits) {}

  double accept_probability(std::uint64_t t, double value, const ValueHistory& history) const override {
    return rule_(t, value, history);
  }
  bool rejects_zeros() const override { return traits_.rejects_zeros; }
  bool is_deterministic() const override { return traits_.deterministic; }
  bool history_free() const override { return traits_.history_free; }
  bool time_invariant() const override { return traits_.time_invariant; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  Rule rule_;
  Traits traits_;
};

/// One deterministic realization of a randomized policy. Every arrival owns
/// an independent coin: a hash of (seed, t, value) for history-free bases and
/// of (seed, t, value, history) otherwise. Repeated queries agree.
class CoinFixedPolicy final : public Policy {
 public:
  CoinFixedPolicy(std::shared_ptr<const Policy> base, std::uint64_t seed) : base_(std::move(base)), seed_(seed) {}

  double accept_probability(std::uint64_t t, double value, const ValueHistory& history) const override {
    const double p = base_->accept_probability(t, value, history);
    if (p <= 0.0 || p >= 1.0) return p <= 0.0 ? 0.0 : 1.0;
    return coin(t, value, history) < p ? 1.0 : 0.0;
  }
  bool rejects_zeros() const override { return base_->rejects_zeros(); }
  bool is_deterministic() const override { return true; }
  bool history_free() const override { return base_->history_free(); }
  bool time_invariant() const override { return base_->time_invariant() && base_->is_deterministic(); }
  std::optional<Objective> objective_tag() const override { return base_->objective_tag(); }
  std::string name() const override { return base_->name(); }
  nlohmann::json describe() const override {
    return {{"kind", "coin_fixed"}, {"seed", seed_}, {"base", base_->describe()}};
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static std::uint64_t bits(double x) {
    std::uint64_t b = 0;
    std::memcpy(&b, &x, sizeof b);
    return b;
  }
  double coin(std::uint64_t t, double value, const ValueHistory& history) const {
    std::uint64_t h = splitmix64(splitmix64(seed_ ^ bits(value)) ^ t);
    if (!base_->history_free())
      for (const ValueHistory::Run& r : history.runs()) h = splitmix64(splitmix64(h ^ bits(r.value)) ^ r.count);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  std::shared_ptr<const Policy> base_;
  std::uint64_t seed_;
};

}  // namespace idblind

#endif  // IDBLIND_POLICY_HPP
