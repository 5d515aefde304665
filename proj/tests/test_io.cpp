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


#include <gtest/gtest.h>

#include "idblind/idblind.hpp"

namespace {

using namespace idblind;

const char* kInstance = R"({
  "name": "demo",
  "boxes": [
    [{"value": 0, "prob": 0.5}, {"value": 2, "prob": 0.5}],
    [{"value": 1, "prob": 1}]
  ],
  "zero_runs": [{"after_box": 1, "count": 3}]
})";

TEST(Json, InstanceRoundTripIsByteStable) {
  const Instance inst = instance_from_json(parse_json_text(kInstance, "demo"));
  EXPECT_EQ(inst.name(), "demo");
  EXPECT_EQ(inst.size(), 2u);
  EXPECT_EQ(inst.dummy_count(), 3u);
  const std::string once = canonical(to_json(inst));
  const std::string twice = canonical(to_json(instance_from_json(parse_json_text(once, "x"))));
  EXPECT_EQ(once, twice);
}

TEST(Json, GeneratedInstancesRoundTrip) {
  for (const Instance& inst : {bernoulli_ladder(7, 0.1), example1(0.5, 0.01).instance,
                               appendix_instances(4, 0.2).det_claim.instance}) {
    const std::string a = canonical(to_json(inst));
    EXPECT_EQ(a, canonical(to_json(instance_from_json(parse_json_text(a, "x")))));
  }
}

TEST(Json, MalformedTextReportsLineAndColumn) {
  try {
    parse_json_text("{\n  \"boxes\": [,]\n}", "bad.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.json:2:"), std::string::npos) << e.what();
  }
}

TEST(Json, SchemaErrorsNameTheField) {
  auto msg = [](const char* text) {
    try {
      instance_from_json(parse_json_text(text, "f"), "f");
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(msg(R"({"boxes": []})").find("f.boxes"), std::string::npos);
  EXPECT_NE(msg(R"({"boxes": [[{"value": 1}]]})").find("f.boxes[0][0].prob"), std::string::npos);
  EXPECT_NE(msg(R"({"boxes": [[{"value": 1, "prob": 0.5}]]})").find("f.boxes[0]"), std::string::npos);
  EXPECT_NE(msg(R"({"boxes": [[{"value": "a", "prob": 1}]]})").find("expected a number"), std::string::npos);
  EXPECT_NE(msg(R"({"boxes": [[{"value": 1, "prob": 1}]], "zero_runs": [{"after_box": 5, "count": 1}]})")
                .find("zero run"),
            std::string::npos);
  EXPECT_NE(msg(R"({"boxes": [[{"value": 1, "prob": 1}]], "zero_runs": [{"after_box": -1, "count": 1}]})")
                .find("nonnegative"),
            std::string::npos);
}

TEST(Json, OrdersAreOneBased) {
  const ArrivalOrder o = order_from_json(Json::parse("[2, 3, 1]"), 3);
  EXPECT_EQ(o[0], 1u);
  EXPECT_EQ(to_json(o), Json::parse("[2, 3, 1]"));
  EXPECT_THROW(order_from_json(Json::parse("[0, 1, 2]"), 3), ParseError);
  EXPECT_THROW(order_from_json(Json::parse("[1, 1, 2]"), 3), ParseError);
  EXPECT_THROW(order_from_json(Json::parse("[1, 2]"), 3), ParseError);
  EXPECT_EQ(orders_from_json(Json::parse("[[1, 2], [2, 1]]"), 2, "o").size(), 2u);
  EXPECT_EQ(orders_from_json(Json::parse("[1, 2]"), 2, "o").size(), 1u);
  EXPECT_EQ(orders_from_json(Json::parse(R"([{"order": [2, 1], "prob": 1}])"), 2, "o")[0][0], 1u);
}

TEST(Json, PriorRoundTrip) {
  const OrderPrior p = maxexp_hardness(2, 0.1).prior;
  const Json j = to_json(p);
  const OrderPrior q = prior_from_json(j, 6);
  EXPECT_EQ(canonical(to_json(q)), canonical(j));
  EXPECT_THROW(prior_from_json(Json::parse(R"([{"order": [1, 2], "prob": 0.4}])"), 2), ParseError);
}

TEST(Json, PolicyDescriptors) {
  const Instance inst = bernoulli_ladder(6, 0.2);
  for (const char* kind : {"theorem2", "prophet_half", "one_over_e", "greedy"})
    EXPECT_NO_THROW(policy_from_json({{"kind", kind}}, inst)) << kind;
  const auto thr = policy_from_json(Json::parse(R"({"kind": "threshold", "tau": 2, "xi": 0.5})"), inst);
  EXPECT_EQ(thr->accept_probability(1, 2.0, {}), 0.5);
  const auto ft = policy_from_json(Json::parse(R"({"kind": "find_threshold", "lambda": 0.3})"), inst);
  EXPECT_NEAR(no_pass_probability(inst, dynamic_cast<const ThresholdPolicy&>(*ft)), 0.3, 1e-10);
  const auto sk = policy_from_json(Json::parse(R"({"kind": "skip_greedy", "skip": 2, "accept_at": 6})"), inst);
  EXPECT_EQ(sk->accept_probability(6, 0.0, {}), 1.0);
  EXPECT_THROW(policy_from_json(Json::parse(R"({"kind": "nope"})"), inst), ParseError);
  EXPECT_THROW(policy_from_json(Json::parse(R"({"kind": "threshold", "tau": 2, "xi": 3})"), inst), ParseError);
  EXPECT_THROW(policy_from_json(Json::parse(R"({"kind": "threshold", "tau": 2})"), inst), ParseError);
}

TEST(Json, DumpedPoliciesReload) {
  const Instance inst = bernoulli_ladder(4, 0.3);
  const ArrivalOrder o({2, 0, 3, 1});
  for (Objective obj : {Objective::max_exp, Objective::max_prob}) {
    const OrderAwarePolicy p = build_order_aware(inst, o, obj);
    const auto q = policy_from_json(p.describe(), inst);
    EXPECT_NEAR(evaluate_exact(inst, o, *q, obj).value, p.value(), 1e-12);
    const auto [h, v] = opt_identity_blind(inst, OrderPrior::uniform({o, ArrivalOrder::identity(4)}), obj);
    const auto r = policy_from_json(h.describe(), inst);
    EXPECT_NEAR(evaluate_exact(inst, o, *r, obj).value, evaluate_exact(inst, o, h, obj).value, 1e-12);
  }
}

TEST(Csv, QuotingAndRows) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("q\"x"), "\"q\"\"x\"");
  const EvalResult r{0.5, Method::exact, 0.0, 0, 0};
  EXPECT_EQ(csv_row("inst", "1-2", "greedy", Objective::max_prob, r), "inst,1-2,greedy,max_prob,exact,0.5,0,0,0");
  EXPECT_EQ(order_label(ArrivalOrder({1, 0, 2}), 0), "2-1-3");
  EXPECT_EQ(order_label(ArrivalOrder::identity(20), 4), "order4[n=20]");
}

}  // namespace
