// Copyright 2026 The ofd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ofd: command-line driver. Every subcommand prints one JSON document on
// stdout. Exit codes: 0 ok, 2 invalid input, 3 enumeration budget exceeded,
// 1 anything else.

#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ofd/ofd.hpp"

namespace {

using namespace ofd;

constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

struct Common {
  std::string instance_path;
  std::string mechanism = "balanced-like";
  std::size_t agent = 0;  // 1-based, 0 when absent
  std::optional<std::string> k;
  std::optional<std::size_t> max_states;
};

struct OutcomeArgs {
  std::string query = "exact";
  std::optional<std::size_t> item;
  std::optional<std::string> prefix_path;
};

struct ManipulateArgs {
  std::string mode = "exact";
  std::optional<std::string> deviation_path;
  bool strict = false;
  std::size_t max_items = 16;
};

struct GenerateArgs {
  std::string kind;
  std::optional<std::string> graph_path;
  std::size_t r = 1;
  bool literal = false;
  std::optional<std::string> set_path;
  long long b = 0;
  std::size_t c = 1;
  RandomInstanceSpec random;
  bool rational = false;
  std::uint64_t seed = 1;
};

struct OracleArgs {
  std::string kind;
  std::optional<std::string> graph_path;
  std::optional<std::string> set_path;
  long long b = 0;
  std::size_t c = 1;
};

struct SampleArgs {
  std::size_t samples = 100'000;
  std::uint64_t seed = 1;
};

EngineOptions engine_options(const Common& common) {
  auto options = EngineOptions::from_environment();
  if (common.max_states) options.max_states = *common.max_states;
  return options;
}

std::size_t agent_index(const Common& common, const Instance& instance) {
  if (common.agent == 0 || common.agent > instance.agents) {
    throw Error(ErrorCode::DimensionMismatch,
                "--agent must lie in [1, " + std::to_string(instance.agents) + "]");
  }
  return common.agent - 1;
}

Rational threshold(const Common& common) {
  if (!common.k) throw Error(ErrorCode::ParseError, "this query needs --k");
  return parse_rational(*common.k);
}

QueryContext context(const Common& common) {
  auto ctx = QueryContext::make(instance_from_json(read_json_file(common.instance_path)),
                                parse_mechanism(common.mechanism));
  ctx.options = engine_options(common);
  return ctx;
}

Json integer_to_json(const Integer& value) {
  if (value >= 0 && value <= std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::uint64_t>(value);
  }
  return value.str();
}

SubsetInstance subset_from(const std::string& path, long long b, std::size_t c) {
  const auto j = read_json_file(path);
  SubsetInstance s;
  const auto& values = j.is_object() ? j.at("values") : j;
  for (const auto& v : values) {
    if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "set values must be integers");
    s.values.push_back(v.get<long long>());
  }
  s.target = j.is_object() && j.contains("target") ? j.at("target").get<long long>() : b;
  s.cardinality = j.is_object() && j.contains("cardinality") ? j.at("cardinality").get<std::size_t>() : c;
  return s;
}

BipartiteGraph graph_from(const std::optional<std::string>& path) {
  if (!path) throw Error(ErrorCode::ParseError, "this kind needs --graph");
  return graph_from_json(read_json_file(*path));
}

Json run_outcome(const Common& common, const OutcomeArgs& args) {
  auto ctx = context(common);
  if (args.prefix_path) ctx.prefix = prefix_from_json(read_json_file(*args.prefix_path), ctx.instance);
  Json out;
  if (args.query == "exact") {
    out = report_to_json(outcome(ctx));
    if (ctx.prefix) out["next_item_probability"] = detail::rationals_to_json(next_item_probability(ctx));
  } else if (args.query == "necessary") {
    const auto agent = agent_index(common, ctx.instance);
    const auto k = threshold(common);
    const auto report = outcome(ctx);
    out = {{"query", "necessary"},
           {"method", std::string(to_string(report.method))},
           {"agent", agent + 1},
           {"k", rational_to_json(k)},
           {"expected_utility", rational_to_json(report.expected_utility[agent])},
           {"result", report.expected_utility[agent] >= k}};
  } else if (args.query == "possible") {
    const auto agent = agent_index(common, ctx.instance);
    out = {{"query", "possible"}, {"agent", agent + 1}};
    if (args.item) {
      if (*args.item == 0 || *args.item > ctx.instance.items) {
        throw Error(ErrorCode::DimensionMismatch, "--item out of range");
      }
      out["item"] = *args.item;
      out["result"] = possible_item(ctx, agent, *args.item - 1);
    } else {
      out["result"] = possible_utility(ctx, agent);
    }
  } else {
    throw Error(ErrorCode::ParseError, "unknown query '" + args.query + "'");
  }
  return out;
}

Json run_manipulate(const Common& common, const ManipulateArgs& args) {
  const auto instance = instance_from_json(read_json_file(common.instance_path));
  const auto mechanism = parse_mechanism(common.mechanism);
  SearchOptions search;
  search.max_items = args.max_items;
  search.engine = engine_options(common);
  if (args.mode == "strategyproof") {
    Json reports = Json::array();
    bool proof = true;
    for (std::size_t agent = 0; agent < instance.agents; ++agent) {
      const auto report = best_response_search(instance, mechanism, agent, search);
      proof = proof && report.gain == 0;
      reports.push_back(manipulation_to_json(report));
    }
    return {{"mode", "strategyproof"}, {"result", proof}, {"agents", std::move(reports)}};
  }
  const auto agent = agent_index(common, instance);
  if (args.mode == "best-response") {
    auto j = manipulation_to_json(best_response_search(instance, mechanism, agent, search));
    j["mode"] = "best-response";
    return j;
  }
  if (!args.deviation_path) throw Error(ErrorCode::ParseError, "mode '" + args.mode + "' needs --deviation");
  auto q = ManipulationQuery::make(instance, mechanism, agent, bid_row_from_json(read_json_file(*args.deviation_path)));
  q.options = search.engine;
  q.strict = args.strict;
  const auto report = evaluate_manipulation(q);
  auto j = manipulation_to_json(report);
  if (args.mode == "exact") {
    j["mode"] = "exact";
  } else if (args.mode == "necessary") {
    q.threshold = common.k ? parse_rational(*common.k) : Rational(0);
    j["mode"] = "necessary";
    j["k"] = rational_to_json(q.threshold);
    j["strict"] = q.strict;
    j["result"] = q.strict ? report.gain > q.threshold : report.gain >= q.threshold;
  } else {
    throw Error(ErrorCode::ParseError, "unknown mode '" + args.mode + "'");
  }
  return j;
}

Json run_generate(GenerateArgs args) {
  if (args.kind == "reduction1") {
    return instance_to_json(reduction1_instance(
        graph_from(args.graph_path), args.literal ? SupportReading::Literal : SupportReading::EdgeRestricted));
  }
  if (args.kind == "reduction2") return instance_to_json(reduction2_instance(graph_from(args.graph_path)));
  if (args.kind == "reduction2-manip") return instance_to_json(reduction2_manip_instance(graph_from(args.graph_path)));
  if (args.kind == "reduction3") return instance_to_json(reduction3_instance(graph_from(args.graph_path), args.r));
  if (args.kind == "subset") {
    if (!args.set_path) throw Error(ErrorCode::ParseError, "kind 'subset' needs --set");
    const auto out = reduction_subset_instance(subset_from(*args.set_path, args.b, args.c));
    auto j = instance_to_json(out.labeled);
    j["threshold"] = rational_to_json(out.threshold);
    j["subset_exists"] = out.subset_exists;
    return j;
  }
  if (args.kind == "random") {
    args.random.binary = !args.rational;
    return instance_to_json(random_instance(args.random, args.seed));
  }
  throw Error(ErrorCode::ParseError, "unknown generator kind '" + args.kind + "'");
}

Json run_oracle(const OracleArgs& args) {
  if (args.kind == "count-pm") return integer_to_json(count_perfect_matchings(graph_from(args.graph_path)));
  if (args.kind == "min-maximal") return min_maximal_matching_size(graph_from(args.graph_path));
  if (args.kind == "subset-sum") {
    if (!args.set_path) throw Error(ErrorCode::ParseError, "kind 'subset-sum' needs --set");
    return subset_sum_bc(subset_from(*args.set_path, args.b, args.c));
  }
  throw Error(ErrorCode::ParseError, "unknown oracle kind '" + args.kind + "'");
}

Json run_sample(const Common& common, const SampleArgs& args) {
  const auto ctx = context(common);
  const auto estimate = monte_carlo_estimate(ctx, args.samples, args.seed);
  return {{"method", std::string(to_string(Method::MonteCarlo))},
          {"samples", estimate.samples},
          {"seed", args.seed},
          {"mean", estimate.mean},
          {"standard_error", estimate.standard_error}};
}

void add_common(CLI::App* cmd, Common& common, bool needs_agent) {
  cmd->add_option("--instance", common.instance_path, "instance JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mechanism", common.mechanism, "like | balanced-like");
  auto* agent = cmd->add_option("--agent", common.agent, "1-based agent index");
  if (needs_agent) agent->required();
  cmd->add_option("--k", common.k, "threshold as a rational string, e.g. 3/4");
  cmd->add_option("--max-states", common.max_states, "enumeration budget (overrides OFD_ENUM_BUDGET)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online fair division: exact outcomes, manipulation and reduction instances"};
  app.require_subcommand(1);

  Common common;
  OutcomeArgs outcome_args;
  ManipulateArgs manipulate_args;
  GenerateArgs generate_args;
  OracleArgs oracle_args;
  SampleArgs sample_args;

  auto* outcome_cmd = app.add_subcommand("outcome", "exact, necessary or possible outcome queries");
  add_common(outcome_cmd, common, false);
  outcome_cmd->add_option("--query", outcome_args.query)->check(CLI::IsMember({"exact", "necessary", "possible"}));
  outcome_cmd->add_option("--item", outcome_args.item, "1-based item for a possible-item query");
  outcome_cmd->add_option("--prefix", outcome_args.prefix_path, "known-prefix JSON file")->check(CLI::ExistingFile);

  auto* manipulate_cmd = app.add_subcommand("manipulate", "strategic bidding by one agent");
  add_common(manipulate_cmd, common, false);
  manipulate_cmd->add_option("--mode", manipulate_args.mode)
      ->check(CLI::IsMember({"exact", "necessary", "best-response", "strategyproof"}));
  manipulate_cmd->add_option("--deviation", manipulate_args.deviation_path, "declared bid row JSON file")
      ->check(CLI::ExistingFile);
  manipulate_cmd->add_flag("--strict", manipulate_args.strict, "ask gain > k instead of gain >= k");
  manipulate_cmd->add_option("--max-items", manipulate_args.max_items, "best-response search cap");

  auto* generate_cmd = app.add_subcommand("generate", "emit an instance JSON");
  generate_cmd->add_option("--kind", generate_args.kind)
      ->required()
      ->check(CLI::IsMember({"reduction1", "reduction2", "reduction2-manip", "reduction3", "subset", "random"}));
  generate_cmd->add_option("--graph", generate_args.graph_path, "graph JSON file")->check(CLI::ExistingFile);
  generate_cmd->add_option("--r", generate_args.r, "matching bound for reduction3");
  generate_cmd->add_flag("--literal", generate_args.literal, "reduction1: mass 1/M on every (item, moment)");
  generate_cmd->add_option("--set", generate_args.set_path, "subset JSON file")->check(CLI::ExistingFile);
  generate_cmd->add_option("--b", generate_args.b, "subset target");
  generate_cmd->add_option("--c", generate_args.c, "subset cardinality");
  generate_cmd->add_option("--agents", generate_args.random.agents);
  generate_cmd->add_option("--items", generate_args.random.items);
  generate_cmd->add_flag("--rational", generate_args.rational, "rational utilities instead of 0/1");
  generate_cmd->add_option("--max-value", generate_args.random.max_value);
  generate_cmd->add_option("--like-probability", generate_args.random.like_probability);
  generate_cmd->add_flag("--distribution", generate_args.random.distribution);
  generate_cmd->add_option("--mixture", generate_args.random.mixture);
  generate_cmd->add_flag("--residual", generate_args.random.leave_residual);
  generate_cmd->add_option("--seed", generate_args.seed);

  auto* oracle_cmd = app.add_subcommand("oracle", "graph and set oracles");
  oracle_cmd->add_option("--kind", oracle_args.kind)
      ->required()
      ->check(CLI::IsMember({"count-pm", "min-maximal", "subset-sum"}));
  oracle_cmd->add_option("--graph", oracle_args.graph_path)->check(CLI::ExistingFile);
  oracle_cmd->add_option("--set", oracle_args.set_path)->check(CLI::ExistingFile);
  oracle_cmd->add_option("--b", oracle_args.b);
  oracle_cmd->add_option("--c", oracle_args.c);

  auto* sample_cmd = app.add_subcommand("sample", "Monte Carlo estimate of expected utilities");
  add_common(sample_cmd, common, false);
  sample_cmd->add_option("--samples", sample_args.samples);
  sample_cmd->add_option("--seed", sample_args.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    Json out;
    if (*outcome_cmd) out = run_outcome(common, outcome_args);
    if (*manipulate_cmd) out = run_manipulate(common, manipulate_args);
    if (*generate_cmd) out = run_generate(generate_args);
    if (*oracle_cmd) out = run_oracle(oracle_args);
    if (*sample_cmd) out = run_sample(common, sample_args);
    std::cout << out.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "ofd: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::BudgetExceeded ? kExitBudget : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "ofd: " << e.what() << '\n';
    return 1;
  }
}
