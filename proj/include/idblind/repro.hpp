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

#ifndef IDBLIND_REPRO_HPP
#define IDBLIND_REPRO_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "idblind/adversary.hpp"
#include "idblind/constants.hpp"
#include "idblind/core.hpp"
#include "idblind/eval.hpp"
#include "idblind/optimal.hpp"
#include "idblind/policy.hpp"
#include "idblind/random.hpp"

namespace idblind {

/// One verified quantity. `relation` is "abs" (|computed - reference| <= tolerance),
/// "le" (computed <= reference + tolerance) or "ge" (computed >= reference - tolerance).
/// Informational rows never affect the verdict.
struct Check {
  std::string name;
  double reference = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  std::string relation = "abs";
  bool pass = false;
  bool informational = false;
  std::string detail;
};

struct Report {
  std::string target;
  std::vector<Check> checks;

  bool pass() const {
    for (const Check& c : checks)
      if (!c.informational && !c.pass) return false;
    return true;
  }

  Check& add(std::string name, double reference, double computed, double tolerance, std::string relation = "abs",
             std::string detail = {}) {
    Check c{std::move(name), reference, computed, tolerance, std::move(relation), false, false, std::move(detail)};
    if (c.relation == "abs")
      c.pass = std::abs(c.computed - c.reference) <= c.tolerance;
    else if (c.relation == "le")
      c.pass = c.computed <= c.reference + c.tolerance;
    else
      c.pass = c.computed >= c.reference - c.tolerance;
    if (std::isnan(c.computed)) c.pass = false;
    checks.push_back(std::move(c));
    return checks.back();
  }

  void note(std::string name, double computed, std::string detail = {}) {
    Check c;
    c.name = std::move(name);
    c.computed = computed;
    c.relation = "info";
    c.pass = true;
    c.informational = true;
    c.detail = std::move(detail);
    checks.push_back(std::move(c));
  }
};

inline nlohmann::json to_json(const Report& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Check& c : r.checks) {
    nlohmann::json j = {{"name", c.name}, {"computed", c.computed}, {"relation", c.relation}, {"pass", c.pass}};
    if (!c.informational) {
      j["reference"] = c.reference;
      j["tolerance"] = c.tolerance;
    }
    if (!c.detail.empty()) j["detail"] = c.detail;
    rows.push_back(j);
  }
  return {{"target", r.target}, {"pass", r.pass()}, {"checks", rows}};
}

inline std::string format_report(const Report& r) {
  std::string out = fmt::format("== {} ==\n", r.target);
  out += fmt::format("{:<52} {:>14} {:>14} {:>10} {:>4}  {}\n", "check", "reference", "computed", "tolerance", "rel",
                     "status");
  for (const Check& c : r.checks) {
    if (c.informational) {
      out += fmt::format("{:<52} {:>14} {:>14.8g} {:>10} {:>4}  {}{}\n", c.name, "-", c.computed, "-", "", "info",
                         c.detail.empty() ? "" : "  " + c.detail);
    } else {
      out += fmt::format("{:<52} {:>14.8g} {:>14.8g} {:>10.3g} {:>4}  {}{}\n", c.name, c.reference, c.computed,
                         c.tolerance, c.relation, c.pass ? "PASS" : "FAIL", c.detail.empty() ? "" : "  " + c.detail);
    }
  }
  out += fmt::format("{}: {}\n", r.target, r.pass() ? "PASS" : "FAIL");
  return out;
}

// ---------------------------------------------------------------------------
// Shared fixtures.

/// Instances whose maximum has no atom above `max_mass`: many boxes with many
/// small atoms on a fine dyadic grid.
inline Instance smooth_random_instance(RandomStream& rng, double max_mass, const std::string& name) {
  for (;;) {
    const auto n = static_cast<std::size_t>(rng.between(3, 8));
    std::vector<DiscreteDistribution> boxes;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(rng.between(30, 48));
      std::set<std::int64_t> levels;
      while (levels.size() < k) levels.insert(rng.between(0, 4095));
      std::vector<double> w;
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        w.push_back(1.0 + rng.uniform01());
        total += w.back();
      }
      std::vector<Atom> atoms;
      double used = 0.0;
      std::size_t j = 0;
      for (std::int64_t l : levels) {
        const double p = j + 1 == k ? 1.0 - used : w[j] / total;
        used += p;
        atoms.push_back({static_cast<double>(l) / 64.0, p});
        ++j;
      }
      boxes.emplace_back(std::move(atoms));
    }
    Instance inst(std::move(boxes), name);
    if (max_point_mass(inst) <= max_mass) return inst;
  }
}

/// The 200-instance suite shared by the threshold and prophet checks.
inline std::vector<Instance> small_random_suite(std::size_t count = 200, std::uint64_t seed = 20260101) {
  std::vector<Instance> out;
  RandomStream rng(seed);
  RandomInstanceShape shape;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_instance(rng, shape, fmt::format("suite{}", i)));
  return out;
}

inline std::vector<ArrivalOrder> random_orders(std::size_t n, std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<ArrivalOrder> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_order(rng, n));
  return out;
}

/// Identity-blind rule for the three-box example: accept 1/eps when seen,
/// decide the ambiguous prefix (0, mid) by `accept_mid`, accept the last box.
inline FunctionPolicy example1_branch(double mid, double epsilon, bool accept_mid) {
  const double big = 1.0 / epsilon;
  return FunctionPolicy(
      accept_mid ? "accept_mid" : "reject_mid",
      [=](std::uint64_t t, double v, const ValueHistory&) -> double {
        if (t >= 3) return 1.0;
        if (v == big) return 1.0;
        if (t == 2 && v == mid) return accept_mid ? 1.0 : 0.0;
        return 0.0;
      },
      {.rejects_zeros = false, .deterministic = true, .history_free = true});
}

/// Accepts every positive value except 0.5.
inline FunctionPolicy reject_half_policy() {
  return FunctionPolicy(
      "reject_half", [](std::uint64_t, double v, const ValueHistory&) { return v > 0.0 && v != 0.5 ? 1.0 : 0.0; },
      {.rejects_zeros = true, .deterministic = true, .history_free = true, .time_invariant = true});
}

/// Deterministic history-dependent rules used against the adaptive adversary.
inline std::vector<FunctionPolicy> handwritten_history_policies() {
  std::vector<FunctionPolicy> out;
  // Passes on the first positive value, then takes any value that beats it.
  out.emplace_back(
      "second_record",
      [](std::uint64_t, double v, const ValueHistory& h) {
        return (h.nonzero_count() >= 1 && v > h.max()) ? 1.0 : 0.0;
      },
      FunctionPolicy::Traits{.rejects_zeros = true, .deterministic = true});
  // Takes a positive value once at least half of all values seen so far are zero.
  out.emplace_back(
      "patient_greedy",
      [](std::uint64_t t, double v, const ValueHistory& h) {
        if (v <= 0.0) return 0.0;
        const std::uint64_t zeros = h.size() - h.nonzero_count();
        return (2 * zeros >= t - 1 && v >= h.max()) ? 1.0 : 0.0;
      },
      FunctionPolicy::Traits{.rejects_zeros = true, .deterministic = true});
  return out;
}

// ---------------------------------------------------------------------------
// Targets.

inline Report repro_constants() {
  Report r{"constants", {}};
  const GapConstants c = solve_lambda_rho_gamma();
  r.add("lambda*", 0.245, c.lambda_star, 1e-3);
  r.add("rho*", 0.513, c.rho_star, 1e-3);
  r.add("Gamma*", 0.562, c.gamma_star, 1e-3);
  r.add("h(lambda*, rho*) - Gamma* residual", 0.0, gap_ratio_bound(c.lambda_star, c.rho_star) - c.gamma_star, 1e-9);
  const MuBound det = solve_mu_deterministic();
  r.add("mu (deterministic claim)", 0.341, det.mu, 1e-3);
  r.add("mu/(1-mu)", 0.517, det.bound, 1e-3);
  const Root single = solve_mu_single_threshold();
  r.add("mu (single-threshold claim)", 0.4464, single.x, 1e-3);
  r.add("1/phi", 0.618034, golden_bound(), 1e-6);
  r.note("1 - lambda*/rho*", 1.0 - c.lambda_star / c.rho_star);
  return r;
}

inline Report repro_example1(double epsilon = 0.01) {
  Report r{"example1", {}};
  auto [inst, orders] = example1(0.5, epsilon);
  r.add("OPT max-exp (1,2,3)", 1.0, opt_order_aware_value(inst, orders[0], Objective::max_exp), 1e-12);
  r.add("OPT max-exp (3,2,1)", 1.5 - epsilon / 2, opt_order_aware_value(inst, orders[1], Objective::max_exp), 1e-12);
  for (double mid : {0.5, golden_bound()}) {
    auto [ex, os] = example1(mid, epsilon);
    const double bound = mid == 0.5 ? 2.0 / 3.0 + 0.02 : 0.638;
    const std::string tag = mid == 0.5 ? "mid=1/2" : "mid=1/phi";
    for (bool accept : {true, false}) {
      const FunctionPolicy p = example1_branch(mid, epsilon, accept);
      const GapReport g = gap(ex, os, p, Objective::max_exp);
      r.add(fmt::format("{} {} min-order ratio", tag, p.name()), bound, g.ratio, 0.0, "le");
    }
    const auto [hp, value] =
        opt_identity_blind(ex, OrderPrior::uniform({os[0], os[1]}), Objective::max_exp);
    const GapReport g = gap(ex, os, hp, Objective::max_exp);
    r.add(fmt::format("{} optimal identity-blind min-order ratio", tag), bound, g.ratio, 0.0, "le");
    r.note(fmt::format("{} optimal identity-blind prior value", tag), value);
  }
  return r;
}

inline Report repro_theorem1(double epsilon = 0.1, std::size_t max_n = 3) {
  Report r{"theorem1", {}};
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= max_n; ++n) {
    const HardnessFamily fam = maxexp_hardness(n, epsilon);
    double worst = 0.0;
    for (const auto& w : fam.prior.support())
      worst = std::max(worst, std::abs(opt_order_aware_value(fam.instance, w.order, Objective::max_exp) -
                                       (2.0 - epsilon)));
    r.add(fmt::format("n={} max |OPT_pi - (2 - eps)|", n), 0.0, worst, 1e-12);

    const auto [free_policy, free_value] = opt_identity_blind(fam.instance, fam.prior, Objective::max_exp);
    IdentityBlindOptions restricted;
    const double big = 1.0 / epsilon;
    restricted.forced = [big](std::uint64_t, double v, const std::vector<double>&) -> std::optional<bool> {
      if (v == big) return true;
      if (v == 0.0) return false;
      return std::nullopt;
    };
    const auto [rest_policy, rest_value] =
        opt_identity_blind(fam.instance, fam.prior, Objective::max_exp, restricted);
    r.add(fmt::format("n={} restricted optimum vs unrestricted", n), free_value, rest_value, 1e-10, "ge");

    double unit = 0.0;
    for (std::size_t i = 0; i < fam.prior.size(); ++i) {
      const auto& w = fam.prior.support()[i];
      const auto profile = acceptance_profile(fam.instance, w.order, rest_policy, Objective::max_exp);
      unit += w.prob * profile[maxexp_hardness_unit_time(n, fam.bits[i]) - 1];
    }
    r.add(fmt::format("n={} value = 1 + Pr[accept unit box]", n), 1.0 + unit, free_value, 1e-10);
    const double ratio = free_value / (2.0 - epsilon);
    r.note(fmt::format("n={} identity-blind value", n), free_value);
    r.add(fmt::format("n={} ratio nonincreasing", n), previous, ratio, 1e-12, "le");
    previous = ratio;
  }
  return r;
}

inline Report repro_theorem2(std::size_t instances = 100, std::size_t orders_per = 5, std::uint64_t seed = 7,
                             const EvalOptions& options = {}) {
  Report r{"theorem2", {}};
  const GapConstants& c = gap_constants();
  RandomStream rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  for (std::size_t i = 0; i < instances; ++i) {
    const Instance inst = smooth_random_instance(rng, 0.05, fmt::format("smooth{}", i));
    const ThresholdPolicy p = theorem2_policy(inst);
    const auto orders = random_orders(inst.size(), orders_per, derive_seed(seed, i));
    const GapReport g = gap(inst, orders, p, Objective::max_prob, options);
    for (const GapRow& row : g.rows) {
      // An MC row only counts with three CI radii of margin.
      const double conservative = row.ratio - 3.0 * row.ratio_ci;
      if (conservative < worst) {
        worst = conservative;
        where = fmt::format("instance {} order {} ({})", i, row.order_index, to_string(row.alg.method));
      }
    }
  }
  r.add("min ratio theorem2 / OPT_pi", c.gamma_star - 0.05, worst, 0.0, "ge", where);
  return r;
}

struct Theorem3Row {
  std::size_t T;
  double lambda_prime;
  bool case1;
  double ratio_case1;  // case 1a or 1b order
  double ratio_case2;
  double formula_ratio;
};

inline Report repro_theorem3(std::size_t n = 2000, std::size_t grid = 40, std::vector<Theorem3Row>* rows = nullptr) {
  Report r{"theorem3", {}};
  const GapConstants& c = gap_constants();
  const double eps = -std::log(c.lambda_star) / static_cast<double>(n);
  const Instance ladder = bernoulli_ladder(n, eps);
  double worst = 0.0, best = 1.0;
  std::size_t worst_t = 0;
  double max_alg_err = 0.0, max_opt_err = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const std::size_t T = 1 + static_cast<std::size_t>(
                                  std::lround(static_cast<double>(j) * static_cast<double>(n - 1) / (grid - 1.0)));
    const Theorem3Orders o = theorem3_orders(n, eps, T);
    const ThresholdPolicy p(static_cast<double>(T), 1.0, Objective::max_prob, fmt::format("T={}", T));
    const double lp = std::pow(1.0 - eps, static_cast<double>(n - T + 1));
    const bool case1 = lp >= c.lambda_star;
    const ArrivalOrder& first = o.case1a ? *o.case1a : o.case1b;
    const double alg1 = evaluate_closed_form(ladder, first, p, Objective::max_prob).value;
    const double opt1 = opt_order_aware_value(ladder, first, Objective::max_prob);
    const double alg2 = evaluate_closed_form(ladder, o.case2, p, Objective::max_prob).value;
    const double opt2 = opt_order_aware_value(ladder, o.case2, Objective::max_prob);
    const double ratio = std::min(alg1 / opt1, alg2 / opt2);

    // Closed-form bookkeeping against the evaluator.
    max_alg_err = std::max(max_alg_err, std::abs(alg2 - Theorem3Formulas::case2_alg(n, eps, T)));
    const long skip2 = std::max<long>(0, o.t_star_case2 - static_cast<long>(T));
    const SkipThenGreedyPolicy bench2(static_cast<std::uint64_t>(skip2), n);
    max_opt_err = std::max(max_opt_err,
                           std::abs(evaluate_closed_form(ladder, o.case2, bench2, Objective::max_prob).value -
                                    Theorem3Formulas::case2_opt_bound(n, eps, T, o.t_star_case2)));
    double formula;
    if (!case1)
      formula = Theorem3Formulas::case2_alg(n, eps, T) / Theorem3Formulas::case2_opt_bound(n, eps, T, o.t_star_case2);
    else if (o.case1a)
      formula = Theorem3Formulas::case1a_alg(n, eps, T, o.t_star_case1) /
                Theorem3Formulas::case1a_opt_bound(n, eps, T, o.t_star_case1);
    else
      formula = Theorem3Formulas::case1b_alg(n, eps, T);
    if (rows) rows->push_back({T, lp, case1, alg1 / opt1, alg2 / opt2, formula});
    if (ratio > worst) {
      worst = ratio;
      worst_t = T;
    }
    best = std::min(best, ratio);
  }
  r.add("max over T of min-order ratio", c.gamma_star + 0.02, worst, 0.0, "le", fmt::format("at T={}", worst_t));
  r.note("min over T of min-order ratio", best);

  const long ts = theorem3_t_star(n, eps, c.lambda_star / c.rho_star);
  const std::size_t T = static_cast<std::size_t>(std::clamp<long>(ts, 1, static_cast<long>(n)));
  const ThresholdPolicy p(static_cast<double>(T), 1.0, Objective::max_prob);
  const ArrivalOrder desc = ArrivalOrder::reversed(n);
  const double ratio_1b = evaluate_closed_form(ladder, desc, p, Objective::max_prob).value /
                          opt_order_aware_value(ladder, desc, Objective::max_prob);
  r.add("case 1b ratio at T = T*", 1.0 - c.lambda_star / c.rho_star, ratio_1b, 0.01, "abs",
        fmt::format("T*={}", ts));
  r.add("case 2 ALG closed form vs evaluator", 0.0, max_alg_err, 1e-9);
  r.add("case 2 skip-then-greedy bound vs evaluator", 0.0, max_opt_err, 1e-9);
  return r;
}

struct AdversaryCase {
  std::string policy;
  double ratio;
  double ratio_ci;
  std::string method;
  bool few_accepts;
  std::size_t probes;
};

inline Report repro_theorem4(std::size_t n = 12, double epsilon = 0.05, const EvalOptions& options = {},
                             bool informational = false, std::vector<AdversaryCase>* cases = nullptr) {
  Report r{fmt::format("theorem4 (n={}, eps={})", n, epsilon), {}};
  const GapConstants& c = gap_constants();
  const Instance ladder = bernoulli_ladder(n, epsilon);
  std::vector<std::shared_ptr<const Policy>> policies;
  policies.push_back(std::make_shared<ThresholdPolicy>(theorem2_policy(ladder)));
  policies.push_back(std::make_shared<ThresholdPolicy>(one_over_e_policy(ladder)));
  policies.push_back(std::make_shared<ThresholdPolicy>(greedy_positive_policy()));
  for (auto& h : handwritten_history_policies()) policies.push_back(std::make_shared<FunctionPolicy>(std::move(h)));

  for (auto base : policies) {
    // The construction needs a deterministic black box; randomized tie
    // breaking is replaced by one fixed realization of its coins.
    const bool fixed = !base->is_deterministic();
    const std::shared_ptr<const Policy> p =
        fixed ? std::make_shared<CoinFixedPolicy>(base, options.seed) : base;
    const AdversaryResult adv = adaptive_adversary(*p, n, epsilon, options.cap);
    const GapReport g = gap(adv.instance, {adv.order}, *p, Objective::max_prob, options);
    const GapRow& row = g.rows.front();
    const std::string detail =
        fmt::format("{} branch, {} probes, {}{}", adv.transcript.few_accepts ? "|A|<a" : "|A|>=a",
                    adv.transcript.probes.size(), to_string(row.alg.method), fixed ? ", coins fixed" : "");
    const double conservative = row.ratio + 3.0 * row.ratio_ci;
    if (cases)
      cases->push_back({p->name(), row.ratio, row.ratio_ci, to_string(row.alg.method), adv.transcript.few_accepts,
                        adv.transcript.probes.size()});
    if (informational)
      r.note(fmt::format("{} adversary ratio", p->name()), row.ratio, detail);
    else
      r.add(fmt::format("{} adversary ratio (+3 CI)", p->name()), c.gamma_star + 0.03, conservative, 0.0, "le",
            detail);
  }
  return r;
}

inline Report repro_appendix(std::size_t n = 400) {
  Report r{"appendix", {}};
  const MuBound det = solve_mu_deterministic();
  const AppendixInstances a = appendix_instances(n, epsilon_for_mass(n, det.mu));
  const ThresholdPolicy accept_half = greedy_positive_policy();
  const FunctionPolicy reject_half = reject_half_policy();
  const auto& d = a.det_claim;
  r.add("det claim, accept 0.5 branch min ratio", det.bound,
        gap(d.instance, d.orders, accept_half, Objective::max_prob).ratio, 0.02);
  r.add("det claim, reject 0.5 branch min ratio", det.bound,
        gap(d.instance, d.orders, reject_half, Objective::max_prob).ratio, 0.02);

  const double mu = solve_mu_single_threshold().x;
  const AppendixInstances b = appendix_instances(n, epsilon_for_mass(n, mu));
  const auto& t = b.threshold_claim;
  const ThresholdPolicy take_half(0.5, 1.0, Objective::max_prob, "tau=0.5");
  const ThresholdPolicy skip_half(1.0, 1.0, Objective::max_prob, "tau=1");
  r.add("threshold claim, tau=0.5 min ratio", mu, gap(t.instance, t.orders, take_half, Objective::max_prob).ratio,
        0.02);
  r.add("threshold claim, tau=1 min ratio", mu, gap(t.instance, t.orders, skip_half, Objective::max_prob).ratio, 0.02);
  return r;
}

inline Report repro_lemma1(std::size_t count = 200, std::size_t orders_per = 5) {
  Report r{"lemma1", {}};
  const std::vector<Instance> suite = small_random_suite(count);
  const double targets[] = {0.1, inv_e(), gap_constants().lambda_star, 0.5};
  for (double lambda : targets) {
    double worst = std::numeric_limits<double>::infinity();
    double worst_f = 0.0;
    for (std::size_t i = 0; i < suite.size(); ++i) {
      const ThresholdPolicy p = find_threshold(suite[i], lambda, Objective::max_prob);
      worst_f = std::max(worst_f, std::abs(no_pass_probability(suite[i], p) - lambda));
      for (const ArrivalOrder& o : random_orders(suite[i].size(), orders_per, derive_seed(1000 + i, 0)))
        worst = std::min(worst, evaluate_exact(suite[i], o, p, Objective::max_prob).value);
    }
    r.add(fmt::format("lambda={:.6f} min ALG", lambda), lambda * std::log(1.0 / lambda), worst, 1e-9, "ge");
    r.add(fmt::format("lambda={:.6f} max |f(xi) - lambda|", lambda), 0.0, worst_f, 1e-10);
  }
  return r;
}

inline Report repro_prophet(std::size_t count = 200, std::size_t orders_per = 5) {
  Report r{"prophet", {}};
  const std::vector<Instance> suite = small_random_suite(count);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const ThresholdPolicy p = prophet_half_policy(suite[i]);
    const double half = expected_max(suite[i]) / 2.0;
    for (const ArrivalOrder& o : random_orders(suite[i].size(), orders_per, derive_seed(1000 + i, 0)))
      worst = std::min(worst, evaluate_exact(suite[i], o, p, Objective::max_exp).value - half);
  }
  r.add("min ALG - E[max]/2", 0.0, worst, 1e-9, "ge");
  return r;
}

/// Random (instance, order, policy, objective) triples for the MC oracle check.
struct OracleTriple {
  Instance instance;
  ArrivalOrder order;
  std::shared_ptr<Policy> policy;
  Objective objective;
};

inline std::vector<OracleTriple> oracle_triples(std::size_t count = 100, std::uint64_t seed = 99) {
  RandomStream rng(seed);
  RandomInstanceShape shape;
  shape.max_boxes = 6;
  shape.max_support = 3;
  std::vector<OracleTriple> out;
  for (std::size_t i = 0; i < count; ++i) {
    Instance inst = random_instance(rng, shape, fmt::format("oracle{}", i));
    ArrivalOrder order = random_order(rng, inst.size());
    const Objective obj = i % 2 == 0 ? Objective::max_prob : Objective::max_exp;
    std::shared_ptr<Policy> p;
    switch (i % 4) {
      case 0: p = std::make_shared<ThresholdPolicy>(find_threshold(inst, 0.1 + 0.8 * rng.uniform01())); break;
      case 1: p = std::make_shared<ThresholdPolicy>(greedy_positive_policy()); break;
      case 2: p = std::make_shared<SkipThenGreedyPolicy>(rng.below(inst.size())); break;
      default:
        p = std::make_shared<FunctionPolicy>(
            "record_after_first",
            [](std::uint64_t t, double v, const ValueHistory& h) { return t >= 2 && v >= h.max() ? 1.0 : 0.0; },
            FunctionPolicy::Traits{});
    }
    out.push_back({std::move(inst), std::move(order), std::move(p), obj});
  }
  return out;
}

inline Report repro_oracle(std::size_t count = 100, std::uint64_t samples = 20'000, std::uint64_t seed = 99) {
  Report r{"oracle", {}};
  std::size_t agree = 0;
  const auto triples = oracle_triples(count, seed);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const double exact = evaluate_exact(t.instance, t.order, *t.policy, t.objective).value;
    const EvalResult mc = evaluate_mc(t.instance, t.order, *t.policy, t.objective, samples, derive_seed(seed, i));
    if (std::abs(mc.value - exact) <= mc.ci_radius) ++agree;
  }
  r.add("MC within 99% CI of exact (count)", 0.95 * static_cast<double>(count), static_cast<double>(agree), 0.0,
        "ge");
  return r;
}

inline const std::vector<std::string>& repro_targets() {
  static const std::vector<std::string> t = {"constants", "example1", "theorem1", "theorem2", "theorem3",
                                             "theorem4",  "appendix", "lemma1",   "prophet",  "oracle"};
  return t;
}

}  // namespace idblind

#endif  // IDBLIND_REPRO_HPP
