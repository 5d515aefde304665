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

FunctionPolicy accept_at_least(double x) {
  return FunctionPolicy("at_least", [x](std::uint64_t, double v, const ValueHistory&) { return v >= x ? 1.0 : 0.0; },
                        {.rejects_zeros = x > 0, .deterministic = true, .history_free = true, .time_invariant = true});
}

FunctionPolicy reject_all() {
  return FunctionPolicy("reject_all", [](std::uint64_t, double, const ValueHistory&) { return 0.0; },
                        {.rejects_zeros = true, .deterministic = true, .history_free = true, .time_invariant = true});
}

// A history-dependent rule: accept a value that beats every earlier value,
// but only after two nonzero observations.
FunctionPolicy third_record() {
  return FunctionPolicy(
      "third_record",
      [](std::uint64_t, double v, const ValueHistory& h) { return h.nonzero_count() >= 2 && v > h.max() ? 1.0 : 0.0; },
      {.rejects_zeros = true});
}

TEST(Exact, ExampleOneThresholdRule) {
  const auto ex = example1(0.5, 0.01);
  const EvalResult r = evaluate_exact(ex.instance, ex.orders[0], accept_at_least(0.4), Objective::max_exp);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
  EXPECT_EQ(r.method, Method::exact);
  EXPECT_EQ(r.ci_radius, 0.0);
}

TEST(Exact, RejectAllScoresZero) {
  const auto ex = example1(0.5, 0.01);
  EXPECT_EQ(evaluate_exact(ex.instance, ex.orders[1], reject_all(), Objective::max_exp).value, 0.0);
  EXPECT_EQ(evaluate_exact(ex.instance, ex.orders[1], reject_all(), Objective::max_prob).value, 0.0);
}

TEST(Exact, TwoBernoulliThreshold) {
  const Instance inst = oracle::iid_bernoulli(2, 1.0, 0.5);
  EXPECT_NEAR(evaluate_exact(inst, ArrivalOrder::identity(2), ThresholdPolicy(1.0, 1.0), Objective::max_prob).value,
              0.75, 1e-12);
}

TEST(Exact, ObjectiveMismatchIsRejected) {
  const Instance inst = oracle::iid_bernoulli(2, 1.0, 0.5);
  EXPECT_THROW(evaluate_exact(inst, ArrivalOrder::identity(2), theorem2_policy(inst), Objective::max_exp),
               ObjectiveMismatch);
}

TEST(Exact, CapRaisesSizeLimitError) {
  const Instance ladder = bernoulli_ladder(30, 0.1);
  EXPECT_THROW(evaluate_exact(ladder, ArrivalOrder::identity(30), third_record(), Objective::max_prob, 1000),
               SizeLimitError);
}

// Property: every evaluator agrees with the brute-force oracle, including
// instances with dummy runs and history-dependent rules.
TEST(Evaluators, AgreeWithOracle) {
  RandomStream rng(404);
  for (int trial = 0; trial < 80; ++trial) {
    RandomInstanceShape shape;
    shape.max_boxes = 5;
    Instance inst = random_instance(rng, shape, "r");
    if (trial % 2 == 0) {
      std::vector<DiscreteDistribution> boxes(inst.boxes().begin(), inst.boxes().end());
      const std::size_t n = boxes.size();
      inst = Instance(std::move(boxes), "r", {{rng.below(n + 1), 1 + rng.below(4)}});
    }
    const ArrivalOrder o = random_order(rng, inst.size());
    const ThresholdPolicy zero_tie(0.0, 0.4);
    const SkipThenGreedyPolicy skip(2, 4);
    const FunctionPolicy rec = third_record();
    const ThresholdPolicy thr = find_threshold(inst, 0.4);
    const std::vector<const Policy*> policies = {&zero_tie, &skip, &rec, &thr};
    for (const Policy* p : policies) {
      for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
        const double brute = oracle::policy_value(inst, o, *p, obj);
        EXPECT_NEAR(evaluate_exact(inst, o, *p, obj).value, brute, 1e-10) << p->name();
        if (p->history_free()) {
          EXPECT_NEAR(evaluate_closed_form(inst, o, *p, obj).value, brute, 1e-10) << p->name();
        }
        const auto profile = acceptance_profile(inst, o, *p, obj);
        EXPECT_EQ(profile.size(), inst.size());
      }
    }
  }
}

TEST(Exact, AcceptanceProfileSumsToAcceptanceMass) {
  const Instance inst = oracle::iid_bernoulli(3, 1.0, 0.5);
  const auto profile = acceptance_profile(inst, ArrivalOrder::identity(3), greedy_positive_policy(), Objective::max_prob);
  ASSERT_EQ(profile.size(), 3u);
  EXPECT_NEAR(profile[0], 0.5, 1e-12);
  EXPECT_NEAR(profile[1], 0.25, 1e-12);
  EXPECT_NEAR(profile[2], 0.125, 1e-12);
}

// Dummies folded in closed form match explicit expansion.
TEST(Evaluators, LongDummyRunsFoldForTimeInvariantPolicies) {
  const Instance inst({DiscreteDistribution::bernoulli(2.0, 0.5), DiscreteDistribution::bernoulli(1.0, 0.3)}, "d",
                      {{0, 40}, {1, 25}, {2, 10}});
  const ThresholdPolicy p(0.0, 0.02);
  auto [full, order] = expand(inst, ArrivalOrder({1, 0}));
  for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
    const double ref = oracle::policy_value(full, order, p, obj);
    EXPECT_NEAR(evaluate_exact(inst, ArrivalOrder({1, 0}), p, obj).value, ref, 1e-12);
    EXPECT_NEAR(evaluate_closed_form(inst, ArrivalOrder({1, 0}), p, obj).value, ref, 1e-12);
  }
}

TEST(MonteCarlo, SingleSampleIsAnOutcome) {
  const Instance inst({DiscreteDistribution({{0.0, 0.5}, {3.0, 0.5}})});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const EvalResult r =
        evaluate_mc(inst, ArrivalOrder::identity(1), greedy_positive_policy(), Objective::max_exp, 1, seed);
    EXPECT_TRUE(r.value == 0.0 || r.value == 3.0);
    EXPECT_EQ(r.samples, 1u);
  }
}

TEST(MonteCarlo, ThreadCountDoesNotChangeOutput) {
  const Instance ladder = bernoulli_ladder(40, 0.05);
  const FunctionPolicy rec = third_record();
  const EvalResult a = evaluate_mc(ladder, ArrivalOrder::identity(40), rec, Objective::max_prob, 50'000, 42, 1);
  const EvalResult b = evaluate_mc(ladder, ArrivalOrder::identity(40), rec, Objective::max_prob, 50'000, 42, 4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.ci_radius, b.ci_radius);
  const EvalResult c = evaluate_mc(ladder, ArrivalOrder::identity(40), rec, Objective::max_prob, 50'000, 43, 1);
  EXPECT_NE(a.value, c.value);
}

TEST(MonteCarlo, WithinConfidenceOfExact) {
  RandomStream rng(606);
  int inside = 0, total = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Instance inst = random_instance(rng, {}, "r");
    const ArrivalOrder o = random_order(rng, inst.size());
    const FunctionPolicy rec = third_record();
    for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
      const double exact = evaluate_exact(inst, o, rec, obj).value;
      const EvalResult mc = evaluate_mc(inst, o, rec, obj, 20'000, derive_seed(606, trial));
      inside += std::abs(mc.value - exact) <= mc.ci_radius + 1e-12;
      ++total;
      EXPECT_EQ(mc.method, Method::mc);
    }
  }
  EXPECT_GE(inside, total * 9 / 10);
}

TEST(MonteCarlo, LadderCaseTwoMatchesClosedForm) {
  const std::size_t n = 2000;
  const double eps = -std::log(gap_constants().lambda_star) / n;
  const Instance ladder = bernoulli_ladder(n, eps);
  const ThresholdPolicy p = theorem2_policy(ladder);
  const std::size_t T = static_cast<std::size_t>(p.tau());
  const ArrivalOrder o = theorem3_case2(n, T);
  const EvalResult mc = evaluate_mc(ladder, o, p, Objective::max_prob, 1'000'000, 11);
  const double closed = evaluate_closed_form(ladder, o, p, Objective::max_prob).value;
  EXPECT_NEAR(mc.value, closed, 0.01);
  // lambda' ln(1/lambda') with lambda' the no-pass probability.
  const double lp = no_pass_probability(ladder, p);
  EXPECT_NEAR(closed, lp * std::log(1.0 / lp), 0.01);
}

TEST(Auto, DispatchPicksTheCheapestExactRoute) {
  const Instance inst = oracle::iid_bernoulli(3, 1.0, 0.5);
  EXPECT_EQ(evaluate(inst, ArrivalOrder::identity(3), greedy_positive_policy(), Objective::max_prob).method,
            Method::closed_form);
  EXPECT_EQ(evaluate(inst, ArrivalOrder::identity(3), third_record(), Objective::max_prob).method, Method::exact);
  const Instance big = bernoulli_ladder(40, 0.1);
  EXPECT_EQ(evaluate(big, ArrivalOrder::identity(40), third_record(), Objective::max_prob, {.samples = 1000}).method,
            Method::mc);
}

TEST(Gap, SingletonOrderWithOptimalPolicyIsOne) {
  const auto ex = example1(0.5, 0.01);
  const OrderAwarePolicy p = build_order_aware(ex.instance, ex.orders[1], Objective::max_exp);
  const GapReport g = gap(ex.instance, {ex.orders[1]}, p, Objective::max_exp);
  EXPECT_NEAR(g.ratio, 1.0, 1e-12);
  EXPECT_FALSE(g.degenerate);
}

TEST(Gap, MinimumOverOrders) {
  const auto ex = example1(0.5, 0.01);
  const FunctionPolicy p = accept_at_least(0.4);
  const GapReport g = gap(ex.instance, ex.orders, p, Objective::max_exp);
  ASSERT_EQ(g.rows.size(), 2u);
  const double r0 = g.rows[0].alg.value / g.rows[0].opt, r1 = g.rows[1].alg.value / g.rows[1].opt;
  EXPECT_NEAR(g.ratio, std::min(r0, r1), 1e-12);
  EXPECT_EQ(g.argmin, r0 <= r1 ? 0u : 1u);
  EXPECT_THROW(gap(ex.instance, {}, p, Objective::max_exp), std::invalid_argument);
}

TEST(Gap, ZeroOptimumRows) {
  const Instance zeros({DiscreteDistribution::point(0.0), DiscreteDistribution::point(0.0)});
  const GapReport g = gap(zeros, {ArrivalOrder::identity(2)}, reject_all(), Objective::max_exp);
  EXPECT_EQ(g.ratio, 1.0);
  EXPECT_FALSE(g.degenerate);
}

TEST(Gap, FlagsZeroMaxMassUnderMaxProb) {
  const Instance two = oracle::iid_bernoulli(2, 1.0, 0.5);
  const auto o = ArrivalOrder::identity(2);
  EXPECT_NEAR(gap(two, {o}, greedy_positive_policy(), Objective::max_prob).zero_max, 0.25, 1e-12);
  EXPECT_EQ(gap(two, {o}, reject_all(), Objective::max_exp).zero_max, 0.0);
}

TEST(ParallelMap, PreservesOrderAndPropagatesErrors) {
  const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); }, 3);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map<int>(
                   10, [](std::size_t i) -> int { if (i == 7) throw std::runtime_error("x"); return 0; }, 2),
               std::runtime_error);
}

}  // namespace
