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


#include <cmath>

#include <gtest/gtest.h>

#include "idblind/idblind.hpp"
#include "oracle.hpp"

namespace {

using namespace idblind;

TEST(OrderAware, ExampleOneMaxExp) {
  const auto ex = example1(0.5, 0.01);
  EXPECT_NEAR(opt_order_aware_maxexp(ex.instance, ex.orders[0]).second, 1.0, 1e-12);
  EXPECT_NEAR(opt_order_aware_maxexp(ex.instance, ex.orders[1]).second, 1.495, 1e-12);
}

TEST(OrderAware, SingleBox) {
  const Instance inst({DiscreteDistribution({{1.0, 0.25}, {3.0, 0.75}})});
  EXPECT_NEAR(opt_order_aware_maxexp(inst, ArrivalOrder::identity(1)).second, 2.5, 1e-12);
  EXPECT_NEAR(opt_order_aware_maxprob(inst, ArrivalOrder::identity(1)).second, 1.0, 1e-12);
}

TEST(OrderAware, DescendingLadderWinsSurely) {
  const std::size_t n = 20;
  EXPECT_NEAR(opt_order_aware_maxprob(bernoulli_ladder(n, 0.1), ArrivalOrder::reversed(n)).second, 1.0, 1e-12);
}

// Accepting a 1 at time 1 wins; after a 0 the second value is the max
// whatever it is, since a zero maximum counts as a win.
TEST(OrderAware, TwoBernoulliMaxProb) {
  const Instance inst = oracle::iid_bernoulli(2, 1.0, 0.5);
  EXPECT_NEAR(opt_order_aware_maxprob(inst, ArrivalOrder::identity(2)).second, 1.0, 1e-12);
  EXPECT_NEAR(oracle::opt_value(inst, ArrivalOrder::identity(2), Objective::max_prob), 1.0, 1e-12);
  // Rejecting zeros throughout loses exactly the all-zero outcome.
  EXPECT_NEAR(evaluate_exact(inst, ArrivalOrder::identity(2), greedy_positive_policy(), Objective::max_prob).value,
              0.75, 1e-12);
}

// Property: the DP value equals the prefix-recursion oracle, and the
// extracted policy achieves it under brute-force evaluation.
TEST(OrderAware, MatchesOracleOnRandomInstances) {
  RandomStream rng(2024);
  for (int trial = 0; trial < 80; ++trial) {
    RandomInstanceShape shape;
    shape.max_boxes = 5;
    std::vector<ZeroRun> runs;
    Instance base = random_instance(rng, shape, "r");
    if (trial % 3 == 0) {
      std::vector<DiscreteDistribution> boxes(base.boxes().begin(), base.boxes().end());
      runs.push_back({rng.below(boxes.size() + 1), 1 + rng.below(3)});
      base = Instance(std::move(boxes), "r", runs);
    }
    const ArrivalOrder o = random_order(rng, base.size());
    for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
      const OrderAwarePolicy p = build_order_aware(base, o, obj);
      const double oracle_opt = oracle::opt_value(base, o, obj);
      EXPECT_NEAR(p.value(), oracle_opt, 1e-10) << trial << " " << to_string(obj);
      EXPECT_NEAR(opt_order_aware_value(base, o, obj), oracle_opt, 1e-10);
      EXPECT_NEAR(oracle::policy_value(base, o, p, obj), oracle_opt, 1e-10);
      EXPECT_NEAR(evaluate_exact(base, o, p, obj).value, oracle_opt, 1e-10);
    }
  }
}

TEST(OrderAware, DescribeListsThresholds) {
  // Two boxes in order: {0, 2} then point 1. Accept 2 at time 1, anything later.
  const Instance inst({DiscreteDistribution::bernoulli(2.0, 0.5), DiscreteDistribution::point(1.0)});
  const OrderAwarePolicy p = build_order_aware(inst, ArrivalOrder::identity(2), Objective::max_exp);
  const auto j = p.describe();
  EXPECT_EQ(j["kind"], "order_aware");
  EXPECT_NEAR(p.value(), 1.5, 1e-12);
  EXPECT_EQ(p.accept_probability(1, 2.0, {}), 1.0);
  EXPECT_EQ(p.accept_probability(1, 0.0, {}), 0.0);
  EXPECT_EQ(p.accept_probability(2, 1.0, {}), 1.0);
}

TEST(IdentityBlind, SingleOrderPriorMatchesOrderAware) {
  RandomStream rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    RandomInstanceShape shape;
    shape.max_boxes = 4;
    shape.max_support = 3;
    const Instance inst = random_instance(rng, shape, "r");
    const ArrivalOrder o = random_order(rng, inst.size());
    for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
      const auto [policy, value] = opt_identity_blind(inst, OrderPrior::uniform({o}), obj);
      EXPECT_NEAR(value, oracle::opt_value(inst, o, obj), 1e-10);
      EXPECT_NEAR(oracle::policy_value(inst, o, policy, obj), value, 1e-10);
    }
  }
}

// Property: on tiny instances the DP equals exhaustive search over every
// deterministic identity-blind decision table.
TEST(IdentityBlind, MatchesExhaustiveSearch) {
  RandomStream rng(99);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 25; ++trial) {
    RandomInstanceShape shape;
    shape.min_boxes = 2;
    shape.max_boxes = 3;
    shape.max_support = 2;
    shape.value_levels = 4;
    const Instance inst = random_instance(rng, shape, "r");
    std::vector<ArrivalOrder> orders = {ArrivalOrder::identity(inst.size()), ArrivalOrder::reversed(inst.size())};
    if (oracle::observable_keys(inst, orders).size() > 12) continue;
    const std::vector<double> w = {0.3, 0.7};
    const OrderPrior prior({{orders[0], 0.3}, {orders[1], 0.7}});
    for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
      const auto [policy, value] = opt_identity_blind(inst, prior, obj);
      EXPECT_NEAR(value, oracle::identity_blind_bruteforce(inst, orders, w, obj), 1e-10);
      double achieved = 0.0;
      for (std::size_t k = 0; k < 2; ++k) achieved += w[k] * oracle::policy_value(inst, orders[k], policy, obj);
      EXPECT_NEAR(achieved, value, 1e-10);
    }
    ++checked;
  }
  EXPECT_GE(checked, 10);
}

TEST(IdentityBlind, ExampleOneIsBelowTwoThirds) {
  const auto ex = example1(0.5, 0.01);
  const auto [policy, value] = opt_identity_blind(ex.instance, OrderPrior::uniform(ex.orders), Objective::max_exp);
  double ratio = 1e9;
  for (const auto& o : ex.orders)
    ratio = std::min(ratio, oracle::policy_value(ex.instance, o, policy, Objective::max_exp) /
                                oracle::opt_value(ex.instance, o, Objective::max_exp));
  EXPECT_LE(ratio, 2.0 / 3.0 + 0.02);
  EXPECT_NEAR(value, 0.5 * (oracle::policy_value(ex.instance, ex.orders[0], policy, Objective::max_exp) +
                            oracle::policy_value(ex.instance, ex.orders[1], policy, Objective::max_exp)),
              1e-12);
}

TEST(IdentityBlind, ForcedDecisionIsHonored) {
  const auto ex = example1(0.5, 0.01);
  IdentityBlindOptions opt;
  opt.forced = [](std::uint64_t t, double v, const std::vector<double>&) -> std::optional<bool> {
    if (t == 2 && v == 0.5) return true;
    return std::nullopt;
  };
  const auto [policy, value] = opt_identity_blind(ex.instance, OrderPrior::uniform(ex.orders), Objective::max_exp, opt);
  ValueHistory h;
  h.push(0.0);
  EXPECT_EQ(policy.accept_probability(2, 0.5, h), 1.0);
}

TEST(IdentityBlind, LimitRaisesSizeLimitError) {
  const HardnessFamily f = maxexp_hardness(2, 0.1);
  IdentityBlindOptions opt;
  opt.limit = 3;
  EXPECT_THROW(opt_identity_blind(f.instance, f.prior, Objective::max_exp, opt), SizeLimitError);
}

// Decomposition on the hardness family: value = 1 + Pr[accept the unit box].
TEST(IdentityBlind, HardnessDecomposition) {
  for (std::size_t n : {1u, 2u}) {
    const HardnessFamily f = maxexp_hardness(n, 0.1);
    const auto [policy, value] = opt_identity_blind(f.instance, f.prior, Objective::max_exp);
    for (const auto& w : f.prior.support())
      EXPECT_NEAR(oracle::opt_value(f.instance, w.order, Objective::max_exp), 1.9, 1e-12);
    double accept_unit = 0.0;
    for (std::size_t k = 0; k < f.prior.size(); ++k) {
      const auto& w = f.prior.support()[k];
      const auto profile = acceptance_profile(f.instance, w.order, policy, Objective::max_exp);
      const std::size_t t = maxexp_hardness_unit_time(n, f.bits[k]);
      accept_unit += w.prob * profile[t - 1];
    }
    EXPECT_NEAR(value, 1.0 + accept_unit, 1e-10);
  }
}

}  // namespace
