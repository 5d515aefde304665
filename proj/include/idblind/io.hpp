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

#ifndef IDBLIND_IO_HPP
#define IDBLIND_IO_HPP

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "idblind/core.hpp"
#include "idblind/eval.hpp"
#include "idblind/optimal.hpp"
#include "idblind/policy.hpp"

namespace idblind {

/// A malformed input. The message carries the source and either a
/// line:column position or the offending field path.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/// Canonical text form: sorted keys, two-space indent, shortest round-trip
/// numbers, trailing newline.
inline std::string canonical(const Json& j) { return j.dump(2) + "\n"; }

/// Shortest round-trip form of a double, as used in CSV output.
inline std::string format_number(double x) { return fmt::format("{}", x); }

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(fmt::format("{}:{}:{}: malformed JSON", source, line, col));
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(fmt::format("{}.{}: missing field", where, key));
  return *it;
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

inline std::uint64_t as_count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    throw ParseError(where + ": expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

template <class F>
auto rethrow_as_parse(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances.

inline Json to_json(const DiscreteDistribution& d) {
  Json atoms = Json::array();
  for (const Atom& a : d.atoms()) atoms.push_back({{"prob", a.prob}, {"value", a.value}});
  return atoms;
}

inline Json to_json(const Instance& instance) {
  Json boxes = Json::array();
  for (const auto& b : instance.boxes()) boxes.push_back(to_json(b));
  Json j = {{"name", instance.name()}, {"boxes", boxes}};
  if (!instance.zero_runs().empty()) {
    Json runs = Json::array();
    for (const ZeroRun& r : instance.zero_runs()) runs.push_back({{"after_box", r.after_box}, {"count", r.count}});
    j["zero_runs"] = runs;
  }
  return j;
}

inline Instance instance_from_json(const Json& j, const std::string& source = "instance") {
  const Json& boxes = detail::field(j, "boxes", source);
  if (!boxes.is_array() || boxes.empty()) throw ParseError(source + ".boxes: expected a nonempty array");
  std::string name;
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw ParseError(source + ".name: expected a string");
    name = it->get<std::string>();
  }
  std::vector<DiscreteDistribution> dists;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::string where = fmt::format("{}.boxes[{}]", source, i);
    if (!boxes[i].is_array()) throw ParseError(where + ": expected an array of atoms");
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < boxes[i].size(); ++k) {
      const std::string at = fmt::format("{}[{}]", where, k);
      atoms.push_back({detail::as_number(detail::field(boxes[i][k], "value", at), at + ".value"),
                       detail::as_number(detail::field(boxes[i][k], "prob", at), at + ".prob")});
    }
    dists.push_back(detail::rethrow_as_parse(where, [&] { return DiscreteDistribution(std::move(atoms)); }));
  }
  std::vector<ZeroRun> runs;
  if (auto it = j.find("zero_runs"); it != j.end()) {
    if (!it->is_array()) throw ParseError(source + ".zero_runs: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = fmt::format("{}.zero_runs[{}]", source, i);
      runs.push_back({static_cast<std::size_t>(
                          detail::as_count(detail::field((*it)[i], "after_box", where), where + ".after_box")),
                      detail::as_count(detail::field((*it)[i], "count", where), where + ".count")});
    }
  }
  return detail::rethrow_as_parse(source,
                                  [&] { return Instance(std::move(dists), std::move(name), std::move(runs)); });
}

// ---------------------------------------------------------------------------
// Orders and priors (1-based box indices on disk).

inline Json to_json(const ArrivalOrder& order) {
  Json a = Json::array();
  for (std::size_t b : order.perm()) a.push_back(b + 1);
  return a;
}

inline ArrivalOrder order_from_json(const Json& j, std::size_t n, const std::string& source = "order") {
  if (!j.is_array()) throw ParseError(source + ": expected an array of 1-based box indices");
  if (j.size() != n) throw ParseError(fmt::format("{}: has {} entries, instance has {} boxes", source, j.size(), n));
  std::vector<std::size_t> perm;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = fmt::format("{}[{}]", source, i);
    const std::uint64_t b = detail::as_count(j[i], where);
    if (b < 1 || b > n) throw ParseError(fmt::format("{}: box index {} outside [1, {}]", where, b, n));
    perm.push_back(static_cast<std::size_t>(b - 1));
  }
  return detail::rethrow_as_parse(source, [&] { return ArrivalOrder(std::move(perm)); });
}

inline Json to_json(const OrderPrior& prior) {
  Json a = Json::array();
  for (const auto& w : prior.support()) a.push_back({{"order", to_json(w.order)}, {"prob", w.prob}});
  return a;
}

inline OrderPrior prior_from_json(const Json& j, std::size_t n, const std::string& source = "prior") {
  if (!j.is_array() || j.empty()) throw ParseError(source + ": expected a nonempty array");
  std::vector<WeightedOrder> support;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = fmt::format("{}[{}]", source, i);
    support.push_back({order_from_json(detail::field(j[i], "order", where), n, where + ".order"),
                       detail::as_number(detail::field(j[i], "prob", where), where + ".prob")});
  }
  return detail::rethrow_as_parse(source, [&] { return OrderPrior(std::move(support)); });
}

/// Accepts a single order, an array of orders, or a prior; returns the orders.
inline std::vector<ArrivalOrder> orders_from_json(const Json& j, std::size_t n, const std::string& source) {
  if (!j.is_array() || j.empty()) throw ParseError(source + ": expected an order or a list of orders");
  if (j[0].is_number()) return {order_from_json(j, n, source)};
  std::vector<ArrivalOrder> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = fmt::format("{}[{}]", source, i);
    if (j[i].is_object())
      out.push_back(order_from_json(detail::field(j[i], "order", where), n, where + ".order"));
    else
      out.push_back(order_from_json(j[i], n, where));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policy descriptors.

/// Builds a policy from a descriptor. Named kinds are computed on `instance`:
/// {"kind": "theorem2" | "prophet_half" | "one_over_e" | "greedy"},
/// {"kind": "threshold", "tau", "xi", "objective"?},
/// {"kind": "find_threshold", "lambda", "objective"?},
/// {"kind": "skip_greedy", "skip", "accept_at"?},
/// {"kind": "order_aware", "objective", "order"} (rebuilt on `instance`),
/// {"kind": "history", "objective", "decisions"}.
inline std::unique_ptr<Policy> policy_from_json(const Json& j, const Instance& instance,
                                                const std::string& source = "policy") {
  const Json& kind_j = detail::field(j, "kind", source);
  if (!kind_j.is_string()) throw ParseError(source + ".kind: expected a string");
  const std::string kind = kind_j.get<std::string>();
  auto objective = [&]() -> std::optional<Objective> {
    auto it = j.find("objective");
    if (it == j.end()) return std::nullopt;
    if (!it->is_string()) throw ParseError(source + ".objective: expected a string");
    return detail::rethrow_as_parse(source + ".objective", [&] { return parse_objective(it->get<std::string>()); });
  };
  return detail::rethrow_as_parse(source, [&]() -> std::unique_ptr<Policy> {
    if (kind == "theorem2") return std::make_unique<ThresholdPolicy>(theorem2_policy(instance));
    if (kind == "prophet_half") return std::make_unique<ThresholdPolicy>(prophet_half_policy(instance));
    if (kind == "one_over_e") return std::make_unique<ThresholdPolicy>(one_over_e_policy(instance));
    if (kind == "greedy") return std::make_unique<ThresholdPolicy>(greedy_positive_policy());
    if (kind == "threshold")
      return std::make_unique<ThresholdPolicy>(
          detail::as_number(detail::field(j, "tau", source), source + ".tau"),
          detail::as_number(detail::field(j, "xi", source), source + ".xi"), objective());
    if (kind == "find_threshold")
      return std::make_unique<ThresholdPolicy>(find_threshold(
          instance, detail::as_number(detail::field(j, "lambda", source), source + ".lambda"), objective()));
    if (kind == "skip_greedy") {
      std::optional<std::uint64_t> at;
      if (auto it = j.find("accept_at"); it != j.end()) at = detail::as_count(*it, source + ".accept_at");
      return std::make_unique<SkipThenGreedyPolicy>(
          detail::as_count(detail::field(j, "skip", source), source + ".skip"), at);
    }
    if (kind == "order_aware") {
      // Rebuilt from its order: the backward induction is deterministic.
      const auto obj = objective();
      if (!obj) throw ParseError(source + ".objective: missing field");
      const ArrivalOrder order = order_from_json(detail::field(j, "order", source), instance.size(), source + ".order");
      return std::make_unique<OrderAwarePolicy>(build_order_aware(instance, order, *obj));
    }
    if (kind == "history") {
      const auto obj = objective();
      if (!obj) throw ParseError(source + ".objective: missing field");
      const Json& rows = detail::field(j, "decisions", source);
      if (!rows.is_array()) throw ParseError(source + ".decisions: expected an array");
      HistoryPolicy::Table table;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string where = fmt::format("{}.decisions[{}]", source, i);
        const Json& prefix = detail::field(rows[i], "prefix", where);
        if (!prefix.is_array()) throw ParseError(where + ".prefix: expected an array");
        std::vector<double> key;
        for (std::size_t k = 0; k < prefix.size(); ++k)
          key.push_back(detail::as_number(prefix[k], fmt::format("{}.prefix[{}]", where, k)));
        key.push_back(detail::as_number(detail::field(rows[i], "value", where), where + ".value"));
        const Json& accept = detail::field(rows[i], "accept", where);
        if (!accept.is_boolean()) throw ParseError(where + ".accept: expected a boolean");
        table[key] = accept.get<bool>();
      }
      return std::make_unique<HistoryPolicy>(std::move(table), *obj);
    }
    throw ParseError(fmt::format("{}.kind: unknown policy kind '{}'", source, kind));
  });
}

// ---------------------------------------------------------------------------
// Results.

inline Json to_json(const EvalResult& r) {
  return {{"value", r.value}, {"method", to_string(r.method)}, {"ci", r.ci_radius}, {"samples", r.samples},
          {"seed", r.seed}};
}

inline std::string csv_header() { return "instance,order,policy,objective,method,value,ci,samples,seed"; }

/// Fields are quoted when they contain a comma or a quote.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::string csv_row(const std::string& instance, const std::string& order, const std::string& policy,
                           Objective objective, const EvalResult& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{}", csv_field(instance), csv_field(order), csv_field(policy),
                     to_string(objective), to_string(r.method), format_number(r.value), format_number(r.ci_radius),
                     r.samples, r.seed);
}

/// 1-based indices joined by '-'; orders longer than 16 become "order<index>[n=<n>]".
inline std::string order_label(const ArrivalOrder& order, std::size_t index) {
  if (order.size() > 16) return fmt::format("order{}[n={}]", index, order.size());
  std::string s;
  for (std::size_t i = 0; i < order.size(); ++i) s += (i ? "-" : "") + std::to_string(order[i] + 1);
  return s;
}

}  // namespace idblind

#endif  // IDBLIND_IO_HPP
