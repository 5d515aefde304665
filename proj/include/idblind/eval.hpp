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

#ifndef IDBLIND_EVAL_HPP
#define IDBLIND_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "idblind/core.hpp"
#include "idblind/optimal.hpp"
#include "idblind/policy.hpp"
#include "idblind/random.hpp"

namespace idblind {

enum class Method { exact, mc, closed_form };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::mc: return "mc";
    case Method::closed_form: return "closed_form";
  }
  return "?";
}

/// 99% two-sided normal quantile.
inline constexpr double kZ99 = 2.576;

struct EvalResult {
  double value = 0.0;
  Method method = Method::exact;
  double ci_radius = 0.0;  // 0 unless method == mc
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::uint64_t cap = 10'000'000;  // exact: product of support sizes; all: explicit dummy steps
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0 = hardware concurrency
};

class ObjectiveMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void check_objective(const Policy& policy, Objective objective) {
  if (auto tag = policy.objective_tag(); tag && *tag != objective)
    throw ObjectiveMismatch("policy '" + policy.name() + "' targets " + to_string(*tag) + ", not " +
                            to_string(objective));
}

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(jobs, 1)));
}

/// Pr[every value after slot j <= grid[r]], for j in [0, n] (row n is all ones).
inline std::vector<std::vector<double>> later_cdf_table(std::span<const Slot> slots, const std::vector<double>& grid) {
  std::vector<std::vector<double>> later(slots.size() + 1, std::vector<double>(grid.size(), 1.0));
  std::vector<double> cdf;
  for (std::size_t j = slots.size(); j-- > 1;) {
    cdf_on_grid(*slots[j].dist, grid, cdf);
    for (std::size_t r = 0; r < grid.size(); ++r) later[j - 1][r] = later[j][r] * cdf[r];
  }
  return later;
}

inline std::vector<double> grid_with_zero(const Instance& instance) {
  std::vector<double> grid = instance.support_union();
  if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  return grid;
}

}  // namespace detail

/// Runs `fn(i)` for i in [0, count) on a small thread pool. Results land by
/// index, so output order never depends on scheduling.
template <class T>
std::vector<T> parallel_map(std::size_t count, const std::function<T(std::size_t)>& fn, unsigned threads = 0) {
  std::vector<T> out(count);
  const unsigned workers = detail::worker_count(threads, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Exact outcome of a policy on one order, with the acceptance mass broken down by slot.
struct ExactTrace {
  double value = 0.0;
  std::vector<double> accept_at_slot;  // per explicit arrival
  double accept_at_dummies = 0.0;
};

/// Enumerates value outcomes in arrival order, stopping each branch at
/// acceptance. Randomized decisions split the branch mass analytically.
inline ExactTrace exact_trace(const Instance& instance, const ArrivalOrder& order, const Policy& policy,
                              Objective objective, std::uint64_t cap = 10'000'000) {
  detail::check_objective(policy, objective);
  if (instance.log10_outcomes() > std::log10(static_cast<double>(cap)) + 1e-12)
    throw SizeLimitError("outcome space exceeds the exact-evaluation cap");
  const bool fold_zeros = policy.rejects_zeros() || policy.time_invariant();
  if (!fold_zeros && instance.dummy_count() > cap)
    throw SizeLimitError("dummy zeros cannot be skipped and exceed the cap");

  const Timeline timeline(instance, order);
  const auto slots = timeline.slots();
  const std::size_t n = slots.size();
  const std::vector<double> grid = detail::grid_with_zero(instance);
  const auto later = detail::later_cdf_table(slots, grid);
  // zero_from[j] = Pr[slots j.. all zero], used by dummies in the gap before slot j.
  std::vector<double> zero_from(n + 1, 1.0);
  for (std::size_t j = n; j-- > 0;) zero_from[j] = zero_from[j + 1] * slots[j].dist->prob_at_most(0.0);

  ExactTrace trace;
  trace.accept_at_slot.assign(n, 0.0);
  ValueHistory history;

  auto zero_payoff = [&](std::size_t j) {
    if (objective == Objective::max_exp) return 0.0;
    return history.max() == 0.0 ? zero_from[j] : 0.0;
  };

  std::function<void(std::size_t, double)> visit = [&](std::size_t j, double mass) {
    // Dummies in the gap before slot j.
    const std::uint64_t gap = timeline.gap_before(j);
    const std::uint64_t gap_start = (j == 0 ? 0 : slots[j - 1].time) + 1;
    if (gap > 0) {
      if (policy.rejects_zeros()) {
        history.push(0.0, gap);
      } else if (policy.time_invariant()) {
        const double a = policy.accept_probability(gap_start, 0.0, history);
        const double taken = mass * (1.0 - std::pow(1.0 - a, static_cast<double>(gap)));
        trace.value += taken * zero_payoff(j);
        trace.accept_at_dummies += taken;
        mass -= taken;
        history.push(0.0, gap);
      } else {
        for (std::uint64_t i = 0; i < gap; ++i) {
          const double a = policy.accept_probability(gap_start + i, 0.0, history);
          trace.value += mass * a * zero_payoff(j);
          trace.accept_at_dummies += mass * a;
          mass *= 1.0 - a;
          history.push(0.0);
        }
      }
    }
    if (j < n && mass > 0.0) {
      const Slot& slot = slots[j];
      for (const Atom& atom : slot.dist->atoms()) {
        const double pm = mass * atom.prob;
        const double a = policy.accept_probability(slot.time, atom.value, history);
        if (a > 0.0) {
          double payoff = atom.value;
          if (objective == Objective::max_prob)
            payoff = atom.value >= history.max() ? later[j][detail::rank_of(grid, atom.value)] : 0.0;
          trace.value += pm * a * payoff;
          trace.accept_at_slot[j] += pm * a;
        }
        if (a < 1.0) {
          history.push(atom.value);
          visit(j + 1, pm * (1.0 - a));
          history.pop();
        }
      }
    }
    if (gap > 0) history.pop(gap);
  };
  visit(0, 1.0);
  return trace;
}

inline EvalResult evaluate_exact(const Instance& instance, const ArrivalOrder& order, const Policy& policy,
                                 Objective objective, std::uint64_t cap = 10'000'000) {
  return {exact_trace(instance, order, policy, objective, cap).value, Method::exact, 0.0, 0, 0};
}

/// Per-slot acceptance probabilities under exact enumeration.
inline std::vector<double> acceptance_profile(const Instance& instance, const ArrivalOrder& order,
                                              const Policy& policy, Objective objective,
                                              std::uint64_t cap = 10'000'000) {
  return exact_trace(instance, order, policy, objective, cap).accept_at_slot;
}

/// Sweep evaluator for history-free policies, O(horizon + n * |grid|).
///
/// Keeps R(v) = Pr[nothing accepted so far and every value so far <= v]. An
/// acceptance of v at slot j wins with R(v) * Pr[every later value <= v].
inline EvalResult evaluate_closed_form(const Instance& instance, const ArrivalOrder& order, const Policy& policy,
                                       Objective objective, std::uint64_t cap = 10'000'000) {
  detail::check_objective(policy, objective);
  if (!policy.history_free()) throw std::invalid_argument("closed-form evaluation needs a history-free policy");
  const bool skip_zeros = policy.rejects_zeros();
  const bool fold_zeros = policy.time_invariant();
  if (!skip_zeros && !fold_zeros && instance.dummy_count() > cap)
    throw SizeLimitError("dummy zeros cannot be folded and exceed the cap");

  const Timeline timeline(instance, order);
  const auto slots = timeline.slots();
  const std::size_t n = slots.size();
  const ValueHistory empty;
  const std::vector<double> grid = detail::grid_with_zero(instance);
  const std::size_t u = grid.size();

  // Backward pass: Pr[every later value <= v] on each slot's support, and
  // Pr[slots j.. all zero] for dummies.
  std::vector<std::vector<double>> stop_win(n);
  std::vector<double> zero_from(n + 1, 1.0);
  {
    std::vector<double> suffix(u, 1.0), cdf;
    for (std::size_t j = n; j-- > 0;) {
      for (const Atom& a : slots[j].dist->atoms()) stop_win[j].push_back(suffix[detail::rank_of(grid, a.value)]);
      detail::cdf_on_grid(*slots[j].dist, grid, cdf);
      for (std::size_t r = 0; r < u; ++r) suffix[r] *= cdf[r];
      zero_from[j] = suffix[0];
    }
  }

  double value = 0.0;
  double scale = 1.0;                // common factor of R
  std::vector<double> reach(u, 1.0);  // R / scale
  auto dummies = [&](std::size_t j) {
    const std::uint64_t gap = timeline.gap_before(j);
    if (gap == 0 || skip_zeros) return;
    const std::uint64_t start = (j == 0 ? 0 : slots[j - 1].time) + 1;
    const double win = objective == Objective::max_prob ? zero_from[j] : 0.0;
    if (fold_zeros) {
      const double a = policy.accept_probability(start, 0.0, empty);
      const double keep = std::pow(1.0 - a, static_cast<double>(gap));
      value += scale * reach[0] * (1.0 - keep) * win;
      scale *= keep;
      return;
    }
    for (std::uint64_t i = 0; i < gap; ++i) {
      const double a = policy.accept_probability(start + i, 0.0, empty);
      value += scale * reach[0] * a * win;
      scale *= 1.0 - a;
    }
  };

  std::vector<double> keep_below;
  for (std::size_t j = 0; j < n; ++j) {
    dummies(j);
    const Slot& slot = slots[j];
    const auto atoms = slot.dist->atoms();
    std::vector<double> reject(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double a = policy.accept_probability(slot.time, atoms[k].value, empty);
      reject[k] = atoms[k].prob * (1.0 - a);
      if (a <= 0.0) continue;
      const double payoff = objective == Objective::max_exp
                                ? atoms[k].value
                                : reach[detail::rank_of(grid, atoms[k].value)] * stop_win[j][k];
      // Max-expectation survival is reach[top] since every value is <= the top of the grid.
      const double alive = objective == Objective::max_exp ? reach[u - 1] : 1.0;
      value += scale * alive * atoms[k].prob * a * payoff;
    }
    // R(v) *= sum_{x <= v} P(x) (1 - a(x)).
    std::size_t k = 0;
    double acc = 0.0;
    for (std::size_t r = 0; r < u; ++r) {
      while (k < atoms.size() && atoms[k].value <= grid[r]) acc += reject[k++];
      reach[r] *= acc;
    }
    // Renormalize to keep the running products away from underflow.
    const double top = reach[u - 1];
    if (top > 0.0 && top < 1e-200) {
      for (double& x : reach) x /= top;
      scale *= top;
    }
  }
  dummies(n);
  return {value, Method::closed_form, 0.0, 0, 0};
}

namespace detail {

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  /// Chan et al. pairwise merge.
  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.n) / total;
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
  }
};

inline constexpr std::size_t kShards = 16;

}  // namespace detail

/// Monte Carlo estimate with a 99% normal confidence radius.
///
/// Samples are split over a fixed number of shards with derived seeds and
/// merged in shard order, so output is identical for any thread count.
inline EvalResult evaluate_mc(const Instance& instance, const ArrivalOrder& order, const Policy& policy,
                              Objective objective, std::uint64_t samples, std::uint64_t seed,
                              unsigned threads = 0, std::uint64_t cap = 10'000'000) {
  detail::check_objective(policy, objective);
  if (samples < 1) throw std::invalid_argument("Monte Carlo needs at least one sample");
  const bool skip_zeros = policy.rejects_zeros();
  const bool fold_zeros = policy.time_invariant();
  if (!skip_zeros && !fold_zeros && instance.dummy_count() > cap)
    throw SizeLimitError("dummy zeros cannot be skipped and exceed the cap");

  const Timeline timeline(instance, order);
  const auto slots = timeline.slots();
  const std::size_t n = slots.size();

  auto run_shard = [&](std::size_t shard) {
    const std::uint64_t count = samples / detail::kShards + (shard < samples % detail::kShards ? 1 : 0);
    RandomStream rng(derive_seed(seed, shard));
    detail::Moments m;
    ValueHistory history;
    for (std::uint64_t s = 0; s < count; ++s) {
      history.clear();
      bool stopped = false;
      double accepted = 0.0;
      std::size_t unseen_from = n;  // first slot whose value was never revealed
      for (std::size_t j = 0; j <= n && !stopped; ++j) {
        const std::uint64_t gap = timeline.gap_before(j);
        if (gap > 0) {
          const std::uint64_t start = (j == 0 ? 0 : slots[j - 1].time) + 1;
          if (skip_zeros) {
            history.push(0.0, gap);
          } else if (fold_zeros) {
            const double a = policy.accept_probability(start, 0.0, history);
            if (rng.uniform01() < 1.0 - std::pow(1.0 - a, static_cast<double>(gap)))
              stopped = true;
            else
              history.push(0.0, gap);
          } else {
            for (std::uint64_t i = 0; i < gap && !stopped; ++i) {
              if (policy.decide(start + i, 0.0, history, rng))
                stopped = true;
              else
                history.push(0.0);
            }
          }
          if (stopped) {
            unseen_from = j;
            break;
          }
        }
        if (j == n) break;
        const double v = slots[j].dist->quantile(rng.uniform01());
        if (policy.decide(slots[j].time, v, history, rng)) {
          stopped = true;
          accepted = v;
          unseen_from = j + 1;
          break;
        }
        history.push(v);
      }
      double payoff = 0.0;
      if (stopped) {
        if (objective == Objective::max_exp) {
          payoff = accepted;
        } else {
          bool win = accepted >= history.max();
          for (std::size_t k = unseen_from; k < n && win; ++k)
            if (slots[k].dist->quantile(rng.uniform01()) > accepted) win = false;
          payoff = win ? 1.0 : 0.0;
        }
      }
      m.add(payoff);
    }
    return m;
  };

  const auto parts = parallel_map<detail::Moments>(detail::kShards, run_shard, threads);
  detail::Moments total;
  for (const auto& p : parts) total.merge(p);
  const double ci = total.n < 2 ? std::numeric_limits<double>::infinity()
                                : kZ99 * std::sqrt(total.m2 / static_cast<double>(total.n - 1)) /
                                      std::sqrt(static_cast<double>(total.n));
  return {total.mean, Method::mc, ci, total.n, seed};
}

/// Closed form for history-free policies, enumeration when the outcome
/// space fits the cap, Monte Carlo otherwise.
inline EvalResult evaluate(const Instance& instance, const ArrivalOrder& order, const Policy& policy,
                           Objective objective, const EvalOptions& options = {}) {
  if (policy.history_free()) return evaluate_closed_form(instance, order, policy, objective, options.cap);
  const bool dummies_ok = policy.rejects_zeros() || policy.time_invariant() || instance.dummy_count() <= options.cap;
  if (dummies_ok && instance.log10_outcomes() <= std::log10(static_cast<double>(options.cap)) + 1e-12)
    return evaluate_exact(instance, order, policy, objective, options.cap);
  return evaluate_mc(instance, order, policy, objective, options.samples, options.seed, options.threads,
                     options.cap);
}

struct GapRow {
  std::size_t order_index = 0;
  EvalResult alg;
  double opt = 0.0;
  double ratio = 0.0;
  double ratio_ci = 0.0;  // alg.ci_radius / opt
  bool degenerate = false;  // opt == 0 and alg > 0
};

struct GapReport {
  double ratio = 1.0;  // min over orders
  std::size_t argmin = 0;
  bool degenerate = false;
  double zero_max = 0.0;  // Pr[max = 0] under max_prob, else 0; an accepted zero wins there
  std::vector<GapRow> rows;
};

/// min over `orders` of ALG / OPT_order. OPT = 0 rows score 1 when ALG = 0
/// and are flagged degenerate otherwise (ratio +inf, never the argmin).
inline GapReport gap(const Instance& instance, const std::vector<ArrivalOrder>& orders, const Policy& policy,
                     Objective objective, const EvalOptions& options = {}) {
  if (orders.empty()) throw std::invalid_argument("gap needs at least one order");
  EvalOptions inner = options;
  inner.threads = 1;
  GapReport report;
  if (objective == Objective::max_prob) report.zero_max = zero_max_mass(instance);
  report.rows = parallel_map<GapRow>(
      orders.size(),
      [&](std::size_t i) {
        GapRow row;
        row.order_index = i;
        row.alg = evaluate(instance, orders[i], policy, objective, inner);
        row.opt = opt_order_aware_value(instance, orders[i], objective);
        if (row.opt > 0.0) {
          row.ratio = row.alg.value / row.opt;
          row.ratio_ci = row.alg.ci_radius / row.opt;
        } else if (row.alg.value == 0.0) {
          row.ratio = 1.0;
        } else {
          row.ratio = std::numeric_limits<double>::infinity();
          row.degenerate = true;
        }
        return row;
      },
      options.threads);
  report.ratio = std::numeric_limits<double>::infinity();
  for (const GapRow& row : report.rows) {
    report.degenerate = report.degenerate || row.degenerate;
    if (row.ratio < report.ratio) {
      report.ratio = row.ratio;
      report.argmin = row.order_index;
    }
  }
  if (!std::isfinite(report.ratio)) report.ratio = 1.0;
  return report;
}

}  // namespace idblind

#endif  // IDBLIND_EVAL_HPP
