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

// Command-line front end. Exit codes: 0 success, 1 failed check, 2 usage or
// input error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "idblind/idblind.hpp"

namespace {

using namespace idblind;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string objective = "max_prob";
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 42;
  std::string format = "text";
  std::uint64_t cap = 10'000'000;
  unsigned threads = 0;

  EvalOptions eval_options() const { return {cap, samples, seed, threads}; }
};

void add_common(CLI::App* cmd, Common& c, bool with_objective = true) {
  if (with_objective)
    cmd->add_option("--objective", c.objective, "max_exp or max_prob")
        ->check(CLI::IsMember({"max_exp", "max_prob"}));
  cmd->add_option("--samples", c.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "base seed for every random draw");
  cmd->add_option("--cap", c.cap, "exact-evaluation size cap")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores); output does not depend on it");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  out << text;
}

// ---------------------------------------------------------------------------
// Input bundles: either a bare instance or {"instance", "orders" | "prior"}.

struct Loaded {
  Instance instance;
  std::vector<ArrivalOrder> orders;
  std::optional<OrderPrior> prior;
};

Loaded load_instance(const std::string& path) {
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("instance")) {
    Instance inst = instance_from_json(j["instance"], path + ":instance");
    std::vector<ArrivalOrder> orders;
    std::optional<OrderPrior> prior;
    if (j.contains("orders")) orders = orders_from_json(j["orders"], inst.size(), path + ":orders");
    if (j.contains("prior")) {
      prior = prior_from_json(j["prior"], inst.size(), path + ":prior");
      orders.clear();
      for (const auto& w : prior->support()) orders.push_back(w.order);
    }
    if (j.contains("order")) orders = {order_from_json(j["order"], inst.size(), path + ":order")};
    return {std::move(inst), std::move(orders), std::move(prior)};
  }
  return {instance_from_json(j, path), {}, std::nullopt};
}

std::vector<ArrivalOrder> load_orders(const std::vector<std::string>& paths, const Loaded& loaded) {
  if (paths.empty()) {
    if (loaded.orders.empty()) return {ArrivalOrder::identity(loaded.instance.size())};
    return loaded.orders;
  }
  std::vector<ArrivalOrder> out;
  for (const std::string& p : paths) {
    const Json j = read_json_file(p);
    const Json& body = j.is_object() && j.contains("orders") ? j["orders"] : j;
    for (auto& o : orders_from_json(body, loaded.instance.size(), p)) out.push_back(std::move(o));
  }
  return out;
}

/// Policy specs: theorem2 | prophet_half | one_over_e | greedy | opt | blind |
/// threshold:TAU:XI | lambda:L | skip:K | @descriptor.json.
/// "opt" is rebuilt for each order, so the factory takes the order. "blind" is
/// the optimal identity-blind policy against `prior`.
using PolicyFactory = std::function<std::unique_ptr<Policy>(const ArrivalOrder&)>;

PolicyFactory policy_factory(const std::string& spec, const Instance& instance, Objective objective,
                             const std::optional<OrderPrior>& prior = std::nullopt) {
  auto fixed = [](std::shared_ptr<Policy> p) -> PolicyFactory {
    return [p](const ArrivalOrder&) -> std::unique_ptr<Policy> {
      // Fixed policies are shared; wrap without copying state.
      struct View final : Policy {
        std::shared_ptr<Policy> p;
        explicit View(std::shared_ptr<Policy> q) : p(std::move(q)) {}
        double accept_probability(std::uint64_t t, double v, const ValueHistory& h) const override {
          return p->accept_probability(t, v, h);
        }
        bool rejects_zeros() const override { return p->rejects_zeros(); }
        bool is_deterministic() const override { return p->is_deterministic(); }
        bool history_free() const override { return p->history_free(); }
        bool time_invariant() const override { return p->time_invariant(); }
        std::optional<Objective> objective_tag() const override { return p->objective_tag(); }
        std::string name() const override { return p->name(); }
        nlohmann::json describe() const override { return p->describe(); }
      };
      return std::make_unique<View>(p);
    };
  };
  if (spec == "blind") {
    if (!prior) throw ParseError("policy 'blind' needs orders or a prior");
    return fixed(std::make_shared<HistoryPolicy>(opt_identity_blind(instance, *prior, objective).first));
  }
  if (spec == "opt")
    return [&instance, objective](const ArrivalOrder& o) -> std::unique_ptr<Policy> {
      return std::make_unique<OrderAwarePolicy>(build_order_aware(instance, o, objective));
    };
  auto colon = [&](std::size_t k) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = spec.find(':', start);
      parts.push_back(spec.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (parts.size() != k) throw ParseError("policy spec '" + spec + "': wrong number of fields");
    return parts;
  };
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double x = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return x;
    } catch (const std::exception&) {
      throw ParseError("policy spec '" + spec + "': '" + s + "' is not a number");
    }
  };
  Json desc;
  if (!spec.empty() && spec[0] == '@') {
    desc = read_json_file(spec.substr(1));
  } else if (spec.rfind("threshold:", 0) == 0) {
    const auto p = colon(3);
    desc = {{"kind", "threshold"}, {"tau", number(p[1])}, {"xi", number(p[2])}};
  } else if (spec.rfind("lambda:", 0) == 0) {
    const auto p = colon(2);
    desc = {{"kind", "find_threshold"}, {"lambda", number(p[1])}};
  } else if (spec.rfind("skip:", 0) == 0) {
    const auto p = colon(2);
    const double k = number(p[1]);
    if (k < 0 || k != std::floor(k)) throw ParseError("policy spec '" + spec + "': skip must be a whole number");
    desc = {{"kind", "skip_greedy"}, {"skip", static_cast<std::uint64_t>(k)}};
  } else {
    desc = {{"kind", spec}};
  }
  std::shared_ptr<Policy> p = policy_from_json(desc, instance, spec);
  return fixed(std::move(p));
}

// ---------------------------------------------------------------------------
// Subcommands.

int run_constants(const std::string& format) {
  const GapConstants c = solve_lambda_rho_gamma();
  const MuBound det = solve_mu_deterministic();
  const Root single = solve_mu_single_threshold();
  Json j = {{"lambda_star", c.lambda_star},
            {"rho_star", c.rho_star},
            {"gamma_star", c.gamma_star},
            {"gamma_residual", c.residual},
            {"mu_deterministic", det.mu},
            {"mu_deterministic_bound", det.bound},
            {"mu_deterministic_residual", det.residual},
            {"mu_single_threshold", single.x},
            {"mu_single_threshold_residual", single.residual},
            {"inverse_golden_ratio", golden_bound()}};
  if (format == "json") {
    std::cout << canonical(j);
  } else {
    for (auto it = j.begin(); it != j.end(); ++it)
      std::cout << fmt::format("{:<30} {}\n", it.key(), format_number(it.value().get<double>()));
  }
  return kExitPass;
}

struct ReproArgs {
  std::string target;
  std::optional<std::size_t> n;
  std::optional<double> eps;
  std::string format = "text";
};

int run_repro(const ReproArgs& a, const Common& c) {
  const EvalOptions opt = c.eval_options();
  Report r;
  if (a.target == "constants") r = repro_constants();
  else if (a.target == "example1") r = repro_example1(a.eps.value_or(0.01));
  else if (a.target == "theorem1") r = repro_theorem1(a.eps.value_or(0.1), a.n.value_or(3));
  else if (a.target == "theorem2") r = repro_theorem2(a.n.value_or(100), 5, c.seed, opt);
  else if (a.target == "theorem3") r = repro_theorem3(a.n.value_or(2000));
  else if (a.target == "theorem4") r = repro_theorem4(a.n.value_or(12), a.eps.value_or(0.05), opt);
  else if (a.target == "appendix") r = repro_appendix(a.n.value_or(400));
  else if (a.target == "lemma1") r = repro_lemma1(a.n.value_or(200));
  else if (a.target == "prophet") r = repro_prophet(a.n.value_or(200));
  else if (a.target == "oracle") r = repro_oracle(a.n.value_or(100), std::min<std::uint64_t>(c.samples, 20'000), c.seed);
  else throw CLI::ValidationError("target", "unknown repro target '" + a.target + "'");
  std::cout << (a.format == "json" ? canonical(to_json(r)) : format_report(r));
  return r.pass() ? kExitPass : kExitCheckFailed;
}

struct GenArgs {
  std::string generator;
  std::size_t n = 6;
  double eps = 0.1;
  double mid = 0.5;
  std::size_t T = 1;
  double mu = 0.0;
  std::string policy = "theorem2";
  std::string out;
  std::uint64_t seed = 42;
};

int run_gen(const GenArgs& g) {
  Json j;
  if (g.generator == "ladder") {
    j = to_json(bernoulli_ladder(g.n, g.eps));
  } else if (g.generator == "example1") {
    auto [inst, orders] = example1(g.mid, g.eps);
    j = {{"instance", to_json(inst)}, {"orders", {to_json(orders[0]), to_json(orders[1])}}};
  } else if (g.generator == "hardness") {
    const HardnessFamily f = maxexp_hardness(g.n, g.eps);
    j = {{"instance", to_json(f.instance)}, {"prior", to_json(f.prior)}};
  } else if (g.generator == "theorem3") {
    const Theorem3Orders o = theorem3_orders(g.n, g.eps, g.T);
    Json orders = Json::object();
    if (o.case1a) orders["case1a"] = to_json(*o.case1a);
    orders["case1b"] = to_json(o.case1b);
    orders["case2"] = to_json(o.case2);
    j = {{"instance", to_json(bernoulli_ladder(g.n, g.eps))},
         {"orders", Json::array({orders.contains("case1a") ? orders["case1a"] : orders["case1b"], orders["case2"]})},
         {"layouts", orders},
         {"t_star_case1", o.t_star_case1},
         {"t_star_case2", o.t_star_case2}};
  } else if (g.generator == "adversary") {
    const Instance ladder = bernoulli_ladder(g.n, g.eps);
    const auto factory = policy_factory(g.policy, ladder, Objective::max_prob);
    std::shared_ptr<const Policy> policy = factory(ArrivalOrder::identity(g.n));
    if (!policy->is_deterministic()) policy = std::make_shared<CoinFixedPolicy>(policy, g.seed);
    const AdversaryResult a = adaptive_adversary(*policy, g.n, g.eps);
    Json probes = Json::array();
    for (const auto& p : a.transcript.probes)
      probes.push_back({{"box", p.box}, {"time", p.time}, {"lower", p.lower}, {"upper", p.upper},
                        {"accepted", p.accepted}, {"stage", p.stage}});
    j = {{"instance", to_json(a.instance)},
         {"order", to_json(a.order)},
         {"transcript",
          {{"probes", probes},
           {"A", a.transcript.accepted},
           {"R", a.transcript.rejected},
           {"B", a.transcript.tail},
           {"few_accepts", a.transcript.few_accepts},
           {"a", a.transcript.a},
           {"t1", a.transcript.t1},
           {"t2", a.transcript.t2}}}};
  } else if (g.generator == "appendix-det" || g.generator == "appendix-threshold") {
    const bool det = g.generator == "appendix-det";
    const double mu = g.mu > 0.0 ? g.mu : (det ? solve_mu_deterministic().mu : solve_mu_single_threshold().x);
    const AppendixInstances a = appendix_instances(g.n, epsilon_for_mass(g.n, mu));
    const InstanceWithOrders& w = det ? a.det_claim : a.threshold_claim;
    j = {{"instance", to_json(w.instance)}, {"orders", {to_json(w.orders[0]), to_json(w.orders[1])}}};
  } else if (g.generator == "random") {
    RandomStream rng(g.seed);
    RandomInstanceShape shape;
    shape.max_boxes = std::max<std::size_t>(1, g.n);
    j = to_json(random_instance(rng, shape, fmt::format("random{}", g.seed)));
  } else {
    throw CLI::ValidationError("generator", "unknown generator '" + g.generator + "'");
  }
  write_output(g.out, canonical(j));
  return kExitPass;
}

struct EvalArgs {
  std::string instance;
  std::vector<std::string> orders;
  std::string policy = "theorem2";
  std::string method = "auto";
  std::string dump_policy;
  std::string format = "csv";
};

/// The bundle's prior unless --orders overrides it; uniform otherwise.
std::optional<OrderPrior> prior_for(const EvalArgs& a, const Loaded& loaded, const std::vector<ArrivalOrder>& orders) {
  if (a.policy != "blind") return std::nullopt;
  if (a.orders.empty() && loaded.prior) return loaded.prior;
  return OrderPrior::uniform(orders);
}

EvalResult evaluate_with(const std::string& method, const Instance& inst, const ArrivalOrder& o, const Policy& p,
                         Objective obj, const Common& c) {
  const EvalOptions opt = c.eval_options();
  if (method == "exact") return evaluate_exact(inst, o, p, obj, c.cap);
  if (method == "mc") return evaluate_mc(inst, o, p, obj, c.samples, c.seed, c.threads, c.cap);
  if (method == "closed_form") return evaluate_closed_form(inst, o, p, obj, c.cap);
  return evaluate(inst, o, p, obj, opt);
}

int run_eval(const EvalArgs& a, const Common& c) {
  const Objective obj = parse_objective(c.objective);
  const Loaded loaded = load_instance(a.instance);
  const auto orders = load_orders(a.orders, loaded);
  const auto factory = policy_factory(a.policy, loaded.instance, obj, prior_for(a, loaded, orders));
  Json rows = Json::array(), dumps = Json::array();
  std::string csv = csv_header() + "\n";
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const auto p = factory(orders[i]);
    const EvalResult r = evaluate_with(a.method, loaded.instance, orders[i], *p, obj, c);
    const std::string label = order_label(orders[i], i);
    csv += csv_row(loaded.instance.name(), label, p->name(), obj, r) + "\n";
    Json row = to_json(r);
    row["instance"] = loaded.instance.name();
    row["order"] = label;
    row["policy"] = p->name();
    row["objective"] = to_string(obj);
    rows.push_back(row);
    dumps.push_back(p->describe());
  }
  std::cout << (a.format == "json" ? canonical(rows) : csv);
  if (!a.dump_policy.empty()) write_output(a.dump_policy, canonical(dumps.size() == 1 ? dumps[0] : dumps));
  return kExitPass;
}

int run_gap(const EvalArgs& a, const Common& c) {
  const Objective obj = parse_objective(c.objective);
  const Loaded loaded = load_instance(a.instance);
  const auto orders = load_orders(a.orders, loaded);
  const auto factory = policy_factory(a.policy, loaded.instance, obj, prior_for(a, loaded, orders));
  Json rows = Json::array();
  double best = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  bool degenerate = false;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const auto p = factory(orders[i]);
    const GapReport g = gap(loaded.instance, {orders[i]}, *p, obj, c.eval_options());
    const GapRow& row = g.rows.front();
    degenerate = degenerate || row.degenerate;
    if (row.ratio < best) {
      best = row.ratio;
      argmin = i;
    }
    rows.push_back({{"order", order_label(orders[i], i)},
                    {"alg", to_json(row.alg)},
                    {"opt", row.opt},
                    {"ratio", row.ratio},
                    {"ratio_ci", row.ratio_ci},
                    {"degenerate", row.degenerate}});
  }
  if (!std::isfinite(best)) best = 1.0;
  const double zero_max = obj == Objective::max_prob ? zero_max_mass(loaded.instance) : 0.0;
  Json out = {{"zero_max", zero_max}, {"instance", loaded.instance.name()}, {"policy", a.policy}, {"objective", to_string(obj)},
              {"gap", best}, {"argmin", order_label(orders[argmin], argmin)}, {"degenerate", degenerate},
              {"rows", rows}};
  if (a.format == "json") {
    std::cout << canonical(out);
  } else {
    std::cout << "order,alg,method,ci,opt,ratio\n";
    for (const Json& r : rows)
      std::cout << fmt::format("{},{},{},{},{},{}\n", csv_field(r["order"].get<std::string>()),
                               format_number(r["alg"]["value"].get<double>()), r["alg"]["method"].get<std::string>(),
                               format_number(r["alg"]["ci"].get<double>()), format_number(r["opt"].get<double>()),
                               format_number(r["ratio"].get<double>()));
    std::cout << fmt::format("gap,{},argmin,{}{}\n", format_number(best), order_label(orders[argmin], argmin),
                             degenerate ? ",degenerate" : "");
    if (zero_max > 0.0)
      std::cerr << fmt::format("note: Pr[max = 0] = {}; an accepted zero counts as a win\n", format_number(zero_max));
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identity-blind online selection: evaluation, optimal benchmarks and hard instances"};
  app.require_subcommand(1);
  Common common;

  auto* constants = app.add_subcommand("constants", "solve every constant and print residuals");
  std::string constants_format = "text";
  constants->add_option("--format", constants_format)->check(CLI::IsMember({"text", "json"}));

  ReproArgs repro;
  auto* repro_cmd = app.add_subcommand("repro", "run a reproduction target and print a pass/fail table");
  repro_cmd->add_option("target", repro.target, "constants | example1 | theorem1 | ... | oracle")
      ->required()
      ->check(CLI::IsMember(repro_targets()));
  repro_cmd->add_option("--n", repro.n, "size parameter of the target");
  repro_cmd->add_option("--eps", repro.eps, "epsilon parameter of the target");
  repro_cmd->add_option("--format", repro.format)->check(CLI::IsMember({"text", "json"}));
  add_common(repro_cmd, common, false);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a generated instance (and orders) as JSON");
  gen_cmd->add_option("generator", gen.generator,
                      "ladder | example1 | hardness | theorem3 | adversary | appendix-det | appendix-threshold | random")
      ->required();
  gen_cmd->add_option("--n", gen.n);
  gen_cmd->add_option("--eps", gen.eps);
  gen_cmd->add_option("--mid", gen.mid);
  gen_cmd->add_option("--T", gen.T);
  gen_cmd->add_option("--mu", gen.mu, "mass (1-eps)^n; defaults to the claim's constant");
  gen_cmd->add_option("--policy", gen.policy, "policy probed by the adversary");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("-o,--out", gen.out, "output path (default stdout)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy on each order");
  auto* gap_cmd = app.add_subcommand("gap", "identity-blindness ratio over the given orders");
  for (auto* cmd : {eval_cmd, gap_cmd}) {
    cmd->add_option("--instance", ev.instance, "instance JSON or generated bundle")->required();
    cmd->add_option("--orders", ev.orders, "order files (1-based arrays, lists, or priors)");
    cmd->add_option("--policy", ev.policy,
                    "theorem2 | prophet_half | one_over_e | greedy | opt | blind | threshold:T:XI | lambda:L | skip:K | @file");
    cmd->add_option("--method", ev.method)->check(CLI::IsMember({"auto", "exact", "mc", "closed_form"}));
    cmd->add_option("--format", ev.format)->check(CLI::IsMember({"csv", "json"}));
    add_common(cmd, common);
  }
  eval_cmd->add_option("--dump-policy", ev.dump_policy, "write the policy descriptor(s) as JSON to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*constants) return run_constants(constants_format);
    if (*repro_cmd) return run_repro(repro, common);
    if (*gen_cmd) return run_gen(gen);
    if (*eval_cmd) return run_eval(ev, common);
    if (*gap_cmd) return run_gap(ev, common);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
