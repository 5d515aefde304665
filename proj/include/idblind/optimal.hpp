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

#ifndef IDBLIND_OPTIMAL_HPP
#define IDBLIND_OPTIMAL_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "idblind/core.hpp"
#include "idblind/policy.hpp"

namespace idblind {

namespace detail {

inline std::size_t rank_of(const std::vector<double>& grid, double v) {
  auto it = std::lower_bound(grid.begin(), grid.end(), v);
  if (it == grid.end() || *it != v) throw std::out_of_range("value is not on the instance's support grid");
  return static_cast<std::size_t>(it - grid.begin());
}

/// dist <= grid[r] for every rank r, in O(|grid| + |atoms|).
inline void cdf_on_grid(const DiscreteDistribution& dist, const std::vector<double>& grid, std::vector<double>& out) {
  out.assign(grid.size(), 0.0);
  const auto atoms = dist.atoms();
  std::size_t a = 0;
  double acc = 0.0;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    while (a < atoms.size() && atoms[a].value <= grid[r]) acc += atoms[a++].prob;
    out[r] = std::min(acc, 1.0);
  }
}

}  // namespace detail

/// An optimal online rule for one known arrival order.
///
/// Max-expectation: accept at slot j iff v >= V_{j+1}, the optimal value of
/// the remaining slots. Max-probability: the state is the best value so far,
/// theta; accept iff v >= theta and Pr[every later value <= v] >= W_{j+1}(max(theta, v)).
/// Ties between stopping and continuing are resolved by accepting.
class OrderAwarePolicy final : public Policy {
 public:
  double accept_probability(std::uint64_t t, double value, const ValueHistory& history) const override {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto j = static_cast<std::size_t>(it - times_.begin());
    const bool dummy = it == times_.end() || *it != t;
    if (objective_ == Objective::max_exp) {
      if (dummy) return value >= value_from_[j] ? 1.0 : 0.0;
      return value >= value_from_[j + 1] ? 1.0 : 0.0;
    }
    const double theta = history.max();
    if (value < theta) return 0.0;
    if (dummy) return (theta == 0.0 && value == 0.0 && zero_accept_[j]) ? 1.0 : 0.0;
    const auto& stop = stop_win_[j];
    auto s = std::lower_bound(stop.begin(), stop.end(), value,
                              [](const std::pair<double, double>& a, double v) { return a.first < v; });
    if (s == stop.end() || s->first != value) return 0.0;
    const double cont = continuation_[j][detail::rank_of(grid_, std::max(theta, value))];
    return s->second >= cont ? 1.0 : 0.0;
  }

  std::optional<Objective> objective_tag() const override { return objective_; }
  std::string name() const override { return "opt_order_aware"; }

  /// Optimal objective value from time 1.
  double value() const { return value_from_.empty() ? 0.0 : value_from_.front(); }

  nlohmann::json describe() const override {
    nlohmann::json slots = nlohmann::json::array();
    for (std::size_t j = 0; j < times_.size(); ++j) {
      nlohmann::json s = {{"time", times_[j]}, {"box", boxes_[j] + 1}};
      if (objective_ == Objective::max_exp) {
        s["threshold"] = value_from_[j + 1];
      } else {
        nlohmann::json rules = nlohmann::json::array();
        for (std::size_t r = 0; r < grid_.size(); ++r) {
          nlohmann::json accepted = nlohmann::json::array();
          for (const auto& [v, win] : stop_win_[j])
            if (v >= grid_[r] && win >= continuation_[j][detail::rank_of(grid_, std::max(grid_[r], v))])
              accepted.push_back(v);
          rules.push_back({{"theta", grid_[r]}, {"accept", accepted}});
        }
        s["rules"] = rules;
      }
      slots.push_back(s);
    }
    nlohmann::json order = nlohmann::json::array();
    for (std::size_t b : boxes_) order.push_back(b + 1);
    return {{"kind", "order_aware"}, {"objective", to_string(objective_)}, {"value", value()},
            {"order", order},        {"slots", slots}};
  }

 private:
  friend OrderAwarePolicy build_order_aware(const Instance&, const ArrivalOrder&, Objective, bool);

  Objective objective_ = Objective::max_exp;
  std::vector<std::uint64_t> times_;
  std::vector<std::size_t> boxes_;
  std::vector<double> grid_;
  // value_from_[j]: optimal value from slot j on, dummies before slot j
  // excluded; value_from_[n] covers the trailing dummies. Max-probability
  // stores W_j(0) here.
  std::vector<double> value_from_;
  // Max-probability only: continuation_[j][r] = W_{j+1}(grid_[r]).
  std::vector<std::vector<double>> continuation_;
  // Max-probability only: (v, Pr[all later values <= v]) over the slot's support.
  std::vector<std::vector<std::pair<double, double>>> stop_win_;
  // Max-probability only: accept a dummy zero in the gap before slot j when
  // every value so far is zero.
  std::vector<char> zero_accept_;
};

/// Backward induction for one order. With `record` unset only the value is
/// kept, which drops the O(n * |grid|) tables.
inline OrderAwarePolicy build_order_aware(const Instance& instance, const ArrivalOrder& order, Objective objective,
                                          bool record = true) {
  const Timeline timeline(instance, order);
  const auto slots = timeline.slots();
  const std::size_t n = slots.size();
  OrderAwarePolicy p;
  p.objective_ = objective;
  for (const Slot& s : slots) {
    p.times_.push_back(s.time);
    p.boxes_.push_back(s.box);
  }
  p.value_from_.assign(n + 1, 0.0);

  if (objective == Objective::max_exp) {
    double v_next = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      double v = 0.0;
      for (const Atom& a : slots[j].dist->atoms()) v += a.prob * std::max(a.value, v_next);
      p.value_from_[j] = v_next = v;
    }
    return p;
  }

  std::vector<double> grid = instance.support_union();
  if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  const std::size_t u = grid.size();
  std::vector<double> suffix(u, 1.0), w(u, 0.0), w_next(u, 0.0), cdf;
  if (record) {
    p.grid_ = grid;
    p.continuation_.resize(n);
    p.stop_win_.resize(n);
    p.zero_accept_.assign(n + 1, 0);
  }
  // Trailing dummies: a zero accepted at the very end wins iff the max is 0.
  if (timeline.gap_before(n) > 0) {
    if (record) p.zero_accept_[n] = 1;
    w[0] = 1.0;
  }
  p.value_from_[n] = w[0];
  for (std::size_t j = n; j-- > 0;) {
    const auto atoms = slots[j].dist->atoms();
    // stop[k] = Pr[all later <= v_k]; gain[k] = max(stop, W_{j+1}(v_k)).
    std::vector<double> gain(atoms.size());
    std::vector<std::size_t> rank(atoms.size());
    if (record) p.stop_win_[j].clear();
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      rank[k] = detail::rank_of(grid, atoms[k].value);
      const double stop = suffix[rank[k]];
      gain[k] = atoms[k].prob * std::max(stop, w[rank[k]]);
      if (record) p.stop_win_[j].emplace_back(atoms[k].value, stop);
    }
    // W_j(theta_r) = sum_{v >= theta_r} P(v) gain(v) + Pr[v < theta_r] W_{j+1}(theta_r).
    std::vector<double> tail(atoms.size() + 1, 0.0);
    for (std::size_t k = atoms.size(); k-- > 0;) tail[k] = tail[k + 1] + gain[k];
    std::size_t k = 0;
    double below = 0.0;
    for (std::size_t r = 0; r < u; ++r) {
      while (k < atoms.size() && atoms[k].value < grid[r]) below += atoms[k++].prob;
      w_next[r] = tail[k] + below * w[r];
    }
    if (record) p.continuation_[j] = w;
    detail::cdf_on_grid(*slots[j].dist, grid, cdf);
    for (std::size_t r = 0; r < u; ++r) suffix[r] *= cdf[r];
    std::swap(w, w_next);
    if (timeline.gap_before(j) > 0 && suffix[0] >= w[0]) {
      if (record) p.zero_accept_[j] = 1;
      w[0] = suffix[0];
    }
    p.value_from_[j] = w[0];
  }
  return p;
}

/// Optimal order-aware value without materializing the decision tables.
inline double opt_order_aware_value(const Instance& instance, const ArrivalOrder& order, Objective objective) {
  return build_order_aware(instance, order, objective, /*record=*/false).value();
}

inline std::pair<OrderAwarePolicy, double> opt_order_aware_maxexp(const Instance& instance,
                                                                  const ArrivalOrder& order) {
  OrderAwarePolicy p = build_order_aware(instance, order, Objective::max_exp);
  const double v = p.value();
  return {std::move(p), v};
}

inline std::pair<OrderAwarePolicy, double> opt_order_aware_maxprob(const Instance& instance,
                                                                   const ArrivalOrder& order) {
  OrderAwarePolicy p = build_order_aware(instance, order, Objective::max_prob);
  const double v = p.value();
  return {std::move(p), v};
}

/// Deterministic rule keyed by the full observed value sequence.
/// Prefixes outside the table are rejected.
class HistoryPolicy final : public Policy {
 public:
  using Table = std::map<std::vector<double>, bool>;

  HistoryPolicy(Table table, Objective objective) : table_(std::move(table)), objective_(objective) {}

  double accept_probability(std::uint64_t, double value, const ValueHistory& history) const override {
    std::vector<double> key = history.expand();
    key.push_back(value);
    auto it = table_.find(key);
    return (it != table_.end() && it->second) ? 1.0 : 0.0;
  }
  std::optional<Objective> objective_tag() const override { return objective_; }
  std::string name() const override { return "opt_identity_blind"; }
  const Table& table() const { return table_; }

  nlohmann::json describe() const override {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& [key, accept] : table_) {
      std::vector<double> prefix(key.begin(), key.end() - 1);
      rows.push_back({{"prefix", prefix}, {"value", key.back()}, {"accept", accept}});
    }
    return {{"kind", "history"}, {"objective", to_string(objective_)}, {"decisions", rows}};
  }

 private:
  Table table_;
  Objective objective_;
};

/// Optional override of the decision at (t, v, prefix); nullopt leaves the
/// choice to the optimizer.
using ForcedDecision =
    std::function<std::optional<bool>(std::uint64_t t, double value, const std::vector<double>& prefix)>;

struct IdentityBlindOptions {
  std::size_t limit = 2'000'000;  // maximum number of (prefix, value) decisions
  ForcedDecision forced;
};

/// Best identity-blind policy against an order prior.
///
/// The state is the observed value prefix. Each order keeps an unnormalized
/// weight (prior mass times the likelihood of the prefix), so posteriors never
/// need renormalizing. Stopping and continuing are compared against these
/// weights; on a tie the policy continues.
inline std::pair<HistoryPolicy, double> opt_identity_blind(const Instance& instance, const OrderPrior& prior,
                                                           Objective objective,
                                                           const IdentityBlindOptions& options = {}) {
  static const DiscreteDistribution kZero = DiscreteDistribution::point(0.0);
  if (prior.order_length() != instance.size())
    throw std::invalid_argument("order prior length does not match the number of boxes");
  if (instance.horizon() > options.limit) throw SizeLimitError("horizon exceeds the history limit");
  const auto horizon = static_cast<std::size_t>(instance.horizon());
  const std::size_t m = prior.size();

  std::vector<double> grid = instance.support_union();
  if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  // seq[o][t]: distribution at time t+1 under order o; later[o][t][r] =
  // Pr[every value after time t+1 <= grid[r]].
  std::vector<std::vector<const DiscreteDistribution*>> seq(m);
  std::vector<std::vector<std::vector<double>>> later(m);
  std::vector<double> cdf;
  for (std::size_t o = 0; o < m; ++o) {
    const Timeline tl(instance, prior.support()[o].order);
    seq[o].assign(horizon, &kZero);
    for (const Slot& s : tl.slots()) seq[o][static_cast<std::size_t>(s.time - 1)] = s.dist;
    later[o].assign(horizon, std::vector<double>(grid.size(), 1.0));
    for (std::size_t t = horizon; t-- > 1;) {
      detail::cdf_on_grid(*seq[o][t], grid, cdf);
      for (std::size_t r = 0; r < grid.size(); ++r) later[o][t - 1][r] = later[o][t][r] * cdf[r];
    }
  }

  HistoryPolicy::Table table;
  std::vector<double> prefix;
  std::size_t nodes = 0;

  std::function<double(std::size_t, const std::vector<double>&, double)> solve =
      [&](std::size_t t, const std::vector<double>& weight, double hmax) -> double {
    if (t == horizon) return 0.0;
    std::vector<double> values;
    for (std::size_t o = 0; o < m; ++o)
      if (weight[o] > 0.0)
        for (const Atom& a : seq[o][t]->atoms()) values.push_back(a.value);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    double total = 0.0;
    std::vector<double> next(m);
    for (double v : values) {
      double mass = 0.0;
      for (std::size_t o = 0; o < m; ++o) {
        next[o] = weight[o] > 0.0 ? weight[o] * seq[o][t]->prob_at(v) : 0.0;
        mass += next[o];
      }
      if (!(mass > 0.0)) continue;
      if (++nodes > options.limit) throw SizeLimitError("history tree exceeds the configured limit");

      double stop = 0.0;
      if (objective == Objective::max_exp) {
        stop = v * mass;
      } else if (v >= hmax) {
        const std::size_t r = detail::rank_of(grid, v);
        for (std::size_t o = 0; o < m; ++o) stop += next[o] * later[o][t][r];
      }

      std::optional<bool> forced;
      if (options.forced) forced = options.forced(t + 1, v, prefix);
      prefix.push_back(v);
      bool accept = true;
      double gain = stop;
      if (!forced || !*forced) {
        const double cont = solve(t + 1, next, std::max(hmax, v));
        accept = forced ? false : stop > cont + 1e-15 * std::max(1.0, std::abs(cont));
        gain = accept ? stop : cont;
      }
      table[prefix] = accept;
      prefix.pop_back();
      total += gain;
    }
    return total;
  };

  std::vector<double> weight(m);
  for (std::size_t o = 0; o < m; ++o) weight[o] = prior.support()[o].prob;
  const double value = solve(0, weight, 0.0);
  return {HistoryPolicy(std::move(table), objective), value};
}

}  // namespace idblind

#endif  // IDBLIND_OPTIMAL_HPP
