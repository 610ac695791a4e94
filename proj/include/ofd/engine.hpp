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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ofd/core.hpp"
#include "ofd/mechanisms.hpp"

namespace ofd {

struct EngineOptions {
  /// Largest merged frontier the enumeration may hold before giving up.
  std::size_t max_states = 1'000'000;
  /// Worker count for frontier expansion; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Frontiers smaller than this are expanded on the calling thread.
  std::size_t parallel_threshold = 4096;

  /// Defaults, with max_states overridden by OFD_ENUM_BUDGET when set.
  static EngineOptions from_environment() {
    EngineOptions options;
    if (const char* budget = std::getenv("OFD_ENUM_BUDGET"); budget != nullptr && *budget != '\0') {
      char* end = nullptr;
      const auto value = std::strtoull(budget, &end, 10);
      if (end == nullptr || *end != '\0' || value == 0) {
        throw Error(ErrorCode::ParseError, "OFD_ENUM_BUDGET must be a positive integer");
      }
      options.max_states = static_cast<std::size_t>(value);
    }
    return options;
  }
};

/// Items that have already arrived (in arrival order) and how they were
/// allocated. Queries then condition on this history.
struct KnownPrefix {
  std::vector<std::size_t> arrived;
  AllocationState state;
};

struct QueryContext {
  Instance instance;
  Mechanism mechanism = Mechanism::Like;
  BidProfile bids;
  std::optional<KnownPrefix> prefix;
  EngineOptions options;

  static QueryContext make(Instance instance, Mechanism mechanism) {
    QueryContext ctx;
    ctx.bids = BidProfile::sincere(instance);
    ctx.instance = std::move(instance);
    ctx.mechanism = mechanism;
    return ctx;
  }

  std::size_t start_moment() const { return prefix ? prefix->arrived.size() : 0; }

  AllocationState start_state() const {
    if (!prefix) return AllocationState(instance.agents);
    AllocationState state = prefix->state;
    state.set_probability(1);
    return state;
  }

  ItemSet start_arrived() const {
    ItemSet arrived;
    if (prefix) {
      for (const auto item : prefix->arrived) arrived.insert(item);
    }
    return arrived;
  }
};

inline void validate_context(const QueryContext& ctx) {
  validate_bids(ctx.instance, ctx.bids);
  if (!ctx.prefix) return;
  const auto& prefix = *ctx.prefix;
  const auto& instance = ctx.instance;
  if (prefix.arrived.size() > instance.items) {
    throw Error(ErrorCode::InconsistentPrefix, "more arrivals than items");
  }
  if (prefix.state.agents() != instance.agents) {
    throw Error(ErrorCode::InconsistentPrefix, "allocation has the wrong number of agents");
  }
  ItemSet arrived;
  for (const auto item : prefix.arrived) {
    if (item >= instance.items || item >= ItemSet::kCapacity) {
      throw Error(ErrorCode::InconsistentPrefix, "arrived item out of range");
    }
    if (arrived.contains(item)) {
      throw Error(ErrorCode::InconsistentPrefix, "item " + std::to_string(item + 1) + " arrived twice");
    }
    arrived.insert(item);
  }
  ItemSet held;
  for (const auto& bundle : prefix.state.bundles()) {
    if ((held.bits() & bundle.bits()) != 0) {
      throw Error(ErrorCode::InconsistentPrefix, "an item is held by two agents");
    }
    if ((bundle.bits() & ~arrived.bits()) != 0) {
      throw Error(ErrorCode::InconsistentPrefix, "an allocated item never arrived");
    }
    held = ItemSet(held.bits() | bundle.bits());
  }
  if (instance.has_fixed_order()) {
    const auto& order = instance.fixed_order().order;
    if (!std::equal(prefix.arrived.begin(), prefix.arrived.end(), order.begin())) {
      throw Error(ErrorCode::InconsistentPrefix, "arrivals disagree with the fixed order");
    }
  }
}

namespace detail {

inline void require_fixed_order(const QueryContext& ctx) {
  if (!ctx.instance.has_fixed_order()) {
    throw Error(ErrorCode::WrongArrivalModel, "operation needs a fixed arrival order");
  }
}

inline void require_enumerable(const Instance& instance) {
  if (instance.items > ItemSet::kCapacity) {
    throw Error(ErrorCode::BudgetExceeded, "enumeration supports at most 64 items");
  }
}

/// (item, probability) pairs with positive mass at one moment.
struct Arrival {
  std::size_t item;
  Rational mass;
};

struct MomentColumn {
  std::vector<Arrival> arrivals;
  Rational residual;  // mass of "nothing arrives"
};

inline std::vector<MomentColumn> moment_columns(const Instance& instance) {
  std::vector<MomentColumn> columns(instance.items);
  if (instance.has_fixed_order()) {
    const auto& order = instance.fixed_order().order;
    for (std::size_t j = 0; j < order.size(); ++j) {
      columns[j].arrivals.push_back({order[j], Rational(1)});
      columns[j].residual = 0;
    }
    return columns;
  }
  const auto& matrix = instance.distribution().matrix;
  for (std::size_t j = 0; j < instance.items; ++j) {
    Rational sum = 0;
    for (std::size_t k = 0; k < instance.items; ++k) {
      if (matrix[k][j] > 0) {
        columns[j].arrivals.push_back({k, matrix[k][j]});
        sum += matrix[k][j];
      }
    }
    columns[j].residual = 1 - sum;
  }
  return columns;
}

struct FrontierKey {
  ItemSet arrived;
  std::vector<ItemSet> bundles;
  auto operator<=>(const FrontierKey&) const = default;
};

using Frontier = std::map<FrontierKey, Rational>;

inline AllocationState state_of(const FrontierKey& key, const Rational& probability) {
  AllocationState state(key.bundles.size());
  for (std::size_t i = 0; i < key.bundles.size(); ++i) {
    for (const auto item : key.bundles[i].items()) state.give(i, item);
  }
  state.set_probability(probability);
  return state;
}

struct StepOutput {
  Frontier next;
  Rational aborted = 0;
  std::vector<Rational> received;  // per agent, mass of receiving this moment's item
};

template <typename It>
StepOutput expand_range(It first, It last, const MomentColumn& column, Mechanism mech,
                        const BidProfile& bids, std::size_t agents) {
  StepOutput out;
  out.received.assign(agents, Rational(0));
  for (auto it = first; it != last; ++it) {
    const auto& [key, probability] = *it;
    if (column.residual > 0) out.aborted += probability * column.residual;
    for (const auto& arrival : column.arrivals) {
      const Rational mass = probability * arrival.mass;
      // A repeated arrival voids the whole run.
      if (key.arrived.contains(arrival.item)) {
        out.aborted += mass;
        continue;
      }
      const auto parent = state_of(key, mass);
      for (auto& step : allocation_step(mech, parent, arrival.item, bids)) {
        FrontierKey child{key.arrived, step.successor.bundles()};
        child.arrived.insert(arrival.item);
        if (step.recipient) out.received[*step.recipient] += step.successor.probability();
        out.next[std::move(child)] += step.successor.probability();
      }
    }
  }
  return out;
}

inline unsigned worker_count(const EngineOptions& options) {
  if (options.threads != 0) return options.threads;
  return std::max(1U, std::thread::hardware_concurrency());
}

/// One moment of the allocation tree: every frontier state meets every
/// possible arrival, then every feasible recipient. Large frontiers are
/// split across workers; exact sums make the merge order irrelevant.
inline StepOutput expand(const Frontier& frontier, const MomentColumn& column, const QueryContext& ctx) {
  const auto agents = ctx.instance.agents;
  const unsigned workers = worker_count(ctx.options);
  if (workers <= 1 || frontier.size() < ctx.options.parallel_threshold) {
    return expand_range(frontier.begin(), frontier.end(), column, ctx.mechanism, ctx.bids, agents);
  }
  const std::size_t chunk = (frontier.size() + workers - 1) / workers;
  std::vector<std::future<StepOutput>> parts;
  auto it = frontier.begin();
  while (it != frontier.end()) {
    auto last = it;
    std::size_t steps = 0;
    while (last != frontier.end() && steps < chunk) {
      ++last;
      ++steps;
    }
    parts.push_back(std::async(std::launch::async, [it, last, &column, &ctx, agents] {
      return expand_range(it, last, column, ctx.mechanism, ctx.bids, agents);
    }));
    it = last;
  }
  StepOutput merged;
  merged.received.assign(agents, Rational(0));
  for (auto& part : parts) {
    auto piece = part.get();
    merged.aborted += piece.aborted;
    for (std::size_t i = 0; i < agents; ++i) merged.received[i] += piece.received[i];
    if (merged.next.empty()) {
      merged.next = std::move(piece.next);
      continue;
    }
    for (auto& [key, p] : piece.next) merged.next[key] += p;
  }
  return merged;
}

}  // namespace detail

/// Result of walking the allocation tree from the context's starting point.
struct Enumeration {
  std::vector<AllocationState> states;  // merged leaves, sorted by bundles
  Rational aborted_mass = 0;            // runs voided by a repeat or an empty moment
  std::size_t peak_frontier = 0;
  /// received[j][i]: probability that agent i receives the item arriving at
  /// moment j, over runs still alive at that moment.
  std::vector<std::vector<Rational>> received;
};

/// Exhaustive allocation tree up to (but excluding) moment `stop`, merging
/// states with identical arrivals and bundles.
inline Enumeration enumerate_allocations(const QueryContext& ctx, std::optional<std::size_t> stop = std::nullopt) {
  validate_context(ctx);
  detail::require_enumerable(ctx.instance);
  const auto& instance = ctx.instance;
  const auto columns = detail::moment_columns(instance);
  const std::size_t start = ctx.start_moment();
  const std::size_t end = std::min(stop.value_or(instance.items), instance.items);

  Enumeration result;
  result.received.assign(instance.items, std::vector<Rational>(instance.agents, Rational(0)));
  detail::Frontier frontier;
  frontier[{ctx.start_arrived(), ctx.start_state().bundles()}] = 1;
  result.peak_frontier = 1;

  for (std::size_t j = start; j < end; ++j) {
    auto step = detail::expand(frontier, columns[j], ctx);
    if (step.next.size() > ctx.options.max_states) {
      throw Error(ErrorCode::BudgetExceeded, "frontier reached " + std::to_string(step.next.size()) +
                                                 " states at moment " + std::to_string(j + 1));
    }
    result.aborted_mass += step.aborted;
    result.received[j] = std::move(step.received);
    frontier = std::move(step.next);
    result.peak_frontier = std::max(result.peak_frontier, frontier.size());
  }
  result.states.reserve(frontier.size());
  for (const auto& [key, p] : frontier) result.states.push_back(detail::state_of(key, p));
  return result;
}

namespace detail {

inline OutcomeReport report_from_allocation(const Instance& instance, Matrix allocation, Method method,
                                            Rational completion) {
  OutcomeReport report;
  report.method = method;
  report.expected_utility.assign(instance.agents, Rational(0));
  for (std::size_t i = 0; i < instance.agents; ++i) {
    for (std::size_t k = 0; k < instance.items; ++k) {
      report.expected_utility[i] += allocation[i][k] * instance.utilities[i][k];
    }
  }
  report.allocation = std::move(allocation);
  report.completion_probability = std::move(completion);
  return report;
}

inline OutcomeReport report_from_enumeration(const Instance& instance, const Enumeration& e) {
  Matrix allocation = zero_matrix(instance.agents, instance.items);
  Rational completion = 0;
  for (const auto& state : e.states) {
    completion += state.probability();
    for (std::size_t i = 0; i < instance.agents; ++i) {
      for (const auto item : state.bundle(i).items()) allocation[i][item] += state.probability();
    }
  }
  return report_from_allocation(instance, std::move(allocation), Method::Enumeration, std::move(completion));
}

inline Matrix held_allocation(const QueryContext& ctx) {
  Matrix allocation = zero_matrix(ctx.instance.agents, ctx.instance.items);
  if (ctx.prefix) {
    for (std::size_t i = 0; i < ctx.instance.agents; ++i) {
      for (const auto item : ctx.prefix->state.bundle(i).items()) allocation[i][item] = 1;
    }
  }
  return allocation;
}

}  // namespace detail

/// Exact outcome under a fixed order by full traversal of the allocation tree.
inline OutcomeReport enumerate_fixed_order(const QueryContext& ctx) {
  detail::require_fixed_order(ctx);
  return detail::report_from_enumeration(ctx.instance, enumerate_allocations(ctx));
}

/// Exact outcome when arrivals are drawn moment by moment from a
/// distribution. Runs that see an item twice, or a moment with no arrival,
/// are voided and contribute the empty allocation.
inline OutcomeReport expected_utility_distribution(const QueryContext& ctx) {
  if (ctx.instance.has_fixed_order()) {
    throw Error(ErrorCode::WrongArrivalModel, "operation needs an arrival distribution");
  }
  return detail::report_from_enumeration(ctx.instance, enumerate_allocations(ctx));
}

/// Like under a fixed order: an item liked by n_k bidders goes to each of
/// them with probability 1/n_k, independently of everything else.
inline OutcomeReport like_closed_form(const QueryContext& ctx) {
  detail::require_fixed_order(ctx);
  if (ctx.mechanism != Mechanism::Like) throw Error(ErrorCode::WrongMechanism, "closed form is for Like only");
  validate_context(ctx);
  const auto& instance = ctx.instance;
  auto allocation = detail::held_allocation(ctx);
  const auto& order = instance.fixed_order().order;
  for (std::size_t j = ctx.start_moment(); j < order.size(); ++j) {
    const auto item = order[j];
    long long likers = 0;
    for (std::size_t i = 0; i < instance.agents; ++i) likers += ctx.bids.positive(i, item) ? 1 : 0;
    if (likers == 0) continue;
    const Rational share(1, likers);
    for (std::size_t i = 0; i < instance.agents; ++i) {
      if (ctx.bids.positive(i, item)) allocation[i][item] = share;
    }
  }
  return detail::report_from_allocation(instance, std::move(allocation), Method::ClosedForm, Rational(1));
}

/// Item counts of the two agents and the probability of that split.
struct CountState {
  std::size_t first = 0;
  std::size_t second = 0;
  Rational probability;
};

struct DpTrace {
  OutcomeReport report;
  std::vector<std::vector<CountState>> rounds;  // live count states after each round
};

/// Balanced Like with two agents under a fixed order. Only item counts
/// matter for feasibility, and after every round at most two count states
/// are alive: (p, q) and (p - 1, q + 1).
inline DpTrace two_agent_dp_trace(const QueryContext& ctx) {
  detail::require_fixed_order(ctx);
  if (ctx.instance.agents != 2) {
    throw Error(ErrorCode::WrongArity, "two-agent DP needs exactly 2 agents, got " +
                                           std::to_string(ctx.instance.agents));
  }
  if (ctx.mechanism != Mechanism::BalancedLike) {
    throw Error(ErrorCode::WrongMechanism, "two-agent DP is for Balanced Like only");
  }
  validate_context(ctx);
  const auto& instance = ctx.instance;
  const auto& order = instance.fixed_order().order;

  DpTrace trace;
  auto allocation = detail::held_allocation(ctx);
  const auto start = ctx.start_state();
  std::map<std::pair<std::size_t, std::size_t>, Rational> states{{{start.count(0), start.count(1)}, Rational(1)}};

  for (std::size_t j = ctx.start_moment(); j < order.size(); ++j) {
    const auto item = order[j];
    std::map<std::pair<std::size_t, std::size_t>, Rational> next;
    for (const auto& [counts, p] : states) {
      const std::size_t held[2] = {counts.first, counts.second};
      const auto feasible = feasible_agents(Mechanism::BalancedLike, held, item, ctx.bids);
      if (feasible.empty()) {
        next[counts] += p;
        continue;
      }
      const Rational share = p / static_cast<long long>(feasible.size());
      for (const auto agent : feasible) {
        allocation[agent][item] += share;
        auto moved = counts;
        (agent == 0 ? moved.first : moved.second) += 1;
        next[moved] += share;
      }
    }
    if (next.size() > 2) throw std::logic_error("two-agent DP frontier exceeded two states");
    if (next.size() == 2) {
      // std::map orders by first count: (p-1, q+1) precedes (p, q).
      const auto& low = next.begin()->first;
      const auto& high = std::next(next.begin())->first;
      if (high.first != low.first + 1 || low.second != high.second + 1) {
        throw std::logic_error("two-agent DP states lost the (p,q), (p-1,q+1) shape");
      }
    }
    states = std::move(next);
    auto& round = trace.rounds.emplace_back();
    for (const auto& [counts, p] : states) round.push_back({counts.first, counts.second, p});
  }
  trace.report = detail::report_from_allocation(instance, std::move(allocation), Method::Dp, Rational(1));
  return trace;
}

inline OutcomeReport two_agent_dp(const QueryContext& ctx) { return two_agent_dp_trace(ctx).report; }

/// Exact outcome through the fastest applicable route: Like closed form,
/// then the two-agent DP, then full enumeration.
inline OutcomeReport outcome(const QueryContext& ctx) {
  if (ctx.instance.has_fixed_order()) {
    if (ctx.mechanism == Mechanism::Like) return like_closed_form(ctx);
    if (ctx.instance.agents == 2) return two_agent_dp(ctx);
    return enumerate_fixed_order(ctx);
  }
  return expected_utility_distribution(ctx);
}

inline Rational exact_utility(const QueryContext& ctx, std::size_t agent) {
  return outcome(ctx).expected_utility.at(agent);
}

inline Rational exact_item_probability(const QueryContext& ctx, std::size_t agent, std::size_t item) {
  return outcome(ctx).allocation.at(agent).at(item);
}

/// Is the agent's expected utility at least `threshold`?
inline bool necessary_utility(const QueryContext& ctx, std::size_t agent, const Rational& threshold) {
  return exact_utility(ctx, agent) >= threshold;
}

namespace detail {

/// Can moments [moment, m) be filled with distinct not-yet-arrived items,
/// each with positive arrival mass? (A perfect matching in the support.)
inline bool completable(const std::vector<MomentColumn>& columns, ItemSet arrived, std::size_t moment) {
  const std::size_t m = columns.size();
  std::vector<std::ptrdiff_t> owner(m, -1);  // item -> moment
  for (std::size_t j = moment; j < m; ++j) {
    std::vector<bool> seen(m, false);
    auto augment = [&](auto&& self, std::size_t at) -> bool {
      for (const auto& arrival : columns[at].arrivals) {
        const auto k = arrival.item;
        if (arrived.contains(k) || seen[k]) continue;
        seen[k] = true;
        if (owner[k] < 0 || self(self, static_cast<std::size_t>(owner[k]))) {
          owner[k] = static_cast<std::ptrdiff_t>(at);
          return true;
        }
      }
      return false;
    };
    if (!augment(augment, j)) return false;
  }
  return true;
}

/// Depth-first search for one positive-probability run of the mechanism
/// that completes and ends in a state satisfying `goal`.
template <typename Goal>
bool find_witness(const QueryContext& ctx, Goal goal) {
  validate_context(ctx);
  require_enumerable(ctx.instance);
  const auto columns = moment_columns(ctx.instance);
  const auto m = ctx.instance.items;
  std::set<FrontierKey> dead;

  auto search = [&](auto&& self, const AllocationState& state, ItemSet arrived, std::size_t moment) -> bool {
    if (!completable(columns, arrived, moment)) return false;
    if (goal(state)) return true;
    if (moment == m) return false;
    FrontierKey key{arrived, state.bundles()};
    if (dead.contains(key)) return false;
    for (const auto& arrival : columns[moment].arrivals) {
      if (arrived.contains(arrival.item)) continue;
      auto next_arrived = arrived;
      next_arrived.insert(arrival.item);
      for (const auto& step : allocation_step(ctx.mechanism, state, arrival.item, ctx.bids)) {
        if (self(self, step.successor, next_arrived, moment + 1)) return true;
      }
    }
    dead.insert(std::move(key));
    if (dead.size() > ctx.options.max_states) {
      throw Error(ErrorCode::BudgetExceeded, "witness search visited too many states");
    }
    return false;
  };
  return search(search, ctx.start_state(), ctx.start_arrived(), ctx.start_moment());
}

}  // namespace detail

/// Does the agent end up with positive utility in some run? For Like this is
/// decided without search: a positive bid on a valued item that will arrive
/// suffices. For Balanced Like one witness run is searched for.
inline bool possible_utility(const QueryContext& ctx, std::size_t agent) {
  const auto& instance = ctx.instance;
  auto valued = [&](const AllocationState& s) {
    for (const auto item : s.bundle(agent).items()) {
      if (instance.utilities[agent][item] > 0) return true;
    }
    return false;
  };
  if (ctx.mechanism == Mechanism::Like) {
    validate_context(ctx);
    const auto columns = detail::moment_columns(instance);
    const auto arrived = ctx.start_arrived();
    if (!detail::completable(columns, arrived, ctx.start_moment())) return false;
    if (valued(ctx.start_state())) return true;
    for (std::size_t k = 0; k < instance.items; ++k) {
      if (!arrived.contains(k) && ctx.bids.positive(agent, k) && instance.likes(agent, k)) return true;
    }
    return false;
  }
  return detail::find_witness(ctx, valued);
}

/// Does the agent receive `item` in some positive-probability run?
inline bool possible_item(const QueryContext& ctx, std::size_t agent, std::size_t item) {
  auto holds = [&](const AllocationState& s) { return s.bundle(agent).contains(item); };
  if (ctx.mechanism == Mechanism::Like) {
    validate_context(ctx);
    const auto columns = detail::moment_columns(ctx.instance);
    const auto arrived = ctx.start_arrived();
    if (!detail::completable(columns, arrived, ctx.start_moment())) return false;
    if (holds(ctx.start_state())) return true;
    return !arrived.contains(item) && ctx.bids.positive(agent, item);
  }
  return detail::find_witness(ctx, holds);
}

/// Probability of each agent receiving the item that arrives right after
/// the known prefix: sum over items of arrival mass times 1/f when the
/// agent is feasible. An item that already arrived cannot be allocated
/// again, so its mass is not counted. O(n*m).
inline std::vector<Rational> next_item_probability(const QueryContext& ctx) {
  validate_context(ctx);
  const auto& instance = ctx.instance;
  const auto moment = ctx.start_moment();
  if (moment >= instance.items) {
    throw Error(ErrorCode::InconsistentPrefix, "every moment has already passed");
  }
  const auto columns = detail::moment_columns(instance);
  const auto arrived = ctx.start_arrived();
  const auto state = ctx.start_state();
  std::vector<Rational> p(instance.agents, Rational(0));
  for (const auto& arrival : columns[moment].arrivals) {
    if (arrived.contains(arrival.item)) continue;
    const auto feasible = feasible_agents(ctx.mechanism, state.counts(), arrival.item, ctx.bids);
    if (feasible.empty()) continue;
    const Rational share = arrival.mass / static_cast<long long>(feasible.size());
    for (const auto agent : feasible) p[agent] += share;
  }
  return p;
}

/// result[j][i]: probability that agent i receives the item arriving at
/// moment j, averaged over every history of the earlier moments.
inline std::vector<std::vector<Rational>> moment_probabilities(const QueryContext& ctx) {
  auto e = enumerate_allocations(ctx);
  if (ctx.prefix) {
    const auto& prefix = *ctx.prefix;
    for (std::size_t j = 0; j < prefix.arrived.size(); ++j) {
      for (std::size_t i = 0; i < ctx.instance.agents; ++i) {
        e.received[j][i] = prefix.state.bundle(i).contains(prefix.arrived[j]) ? 1 : 0;
      }
    }
  }
  return e.received;
}

/// A positive lower bound on every nonzero branch contribution
/// (history probability times next-item probability), so that "possibly
/// positive" becomes "necessarily at least epsilon". Conservative: the
/// product over moments of the smallest positive arrival mass, times (1/n)^m.
inline Rational epsilon_bound(const QueryContext& ctx, std::size_t agent) {
  validate_context(ctx);
  const auto& instance = ctx.instance;
  const auto columns = detail::moment_columns(instance);
  bool reachable = false;
  Rational bound = 1;
  for (const auto& column : columns) {
    Rational smallest = 0;
    for (const auto& arrival : column.arrivals) {
      if (smallest == 0 || arrival.mass < smallest) smallest = arrival.mass;
      if (ctx.bids.positive(agent, arrival.item)) reachable = true;
    }
    if (smallest > 0) bound *= smallest;
  }
  if (!reachable) {
    throw Error(ErrorCode::NoPositiveBranch,
                "agent " + std::to_string(agent + 1) + " bids on no item that can arrive");
  }
  for (std::size_t j = 0; j < instance.items; ++j) bound /= static_cast<long long>(instance.agents);
  return bound;
}

struct MonteCarloEstimate {
  std::vector<double> mean;            // per agent
  std::vector<double> standard_error;  // per agent
  std::size_t samples = 0;
};

/// Simulates independent runs (arrivals first, then the mechanism's coin
/// flips) and averages each agent's true utility. Voided runs score zero.
inline MonteCarloEstimate monte_carlo_estimate(const QueryContext& ctx, std::size_t samples, std::uint64_t seed) {
  validate_context(ctx);
  if (samples == 0) throw Error(ErrorCode::ParseError, "sample count must be positive");
  const auto& instance = ctx.instance;
  const auto n = instance.agents;
  const auto columns = detail::moment_columns(instance);
  std::vector<std::vector<double>> utility(n, std::vector<double>(instance.items));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < instance.items; ++k) utility[i][k] = to_double(instance.utilities[i][k]);
  }
  std::vector<std::vector<double>> masses(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (const auto& a : columns[j].arrivals) masses[j].push_back(to_double(a.mass));
  }

  const auto start = ctx.start_state();
  const auto start_arrived = ctx.start_arrived();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> sum(n, 0.0);
  std::vector<double> sum_sq(n, 0.0);
  std::vector<double> run(n);
  std::vector<std::size_t> counts(n);
  std::vector<bool> arrived(instance.items);

  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      run[i] = 0;
      for (const auto item : start.bundle(i).items()) run[i] += utility[i][item];
    }
    counts = start.counts();
    for (std::size_t k = 0; k < instance.items; ++k) arrived[k] = start_arrived.contains(k);
    bool voided = false;
    for (std::size_t j = ctx.start_moment(); j < instance.items && !voided; ++j) {
      double r = unit(rng);
      std::optional<std::size_t> item;
      for (std::size_t a = 0; a < masses[j].size(); ++a) {
        if (r < masses[j][a]) {
          item = columns[j].arrivals[a].item;
          break;
        }
        r -= masses[j][a];
      }
      // Rounding must not invent a no-arrival event the exact model lacks.
      if (!item && columns[j].residual == 0 && !columns[j].arrivals.empty()) {
        item = columns[j].arrivals.back().item;
      }
      if (!item || arrived[*item]) {
        voided = true;
        break;
      }
      arrived[*item] = true;
      const auto feasible = feasible_agents(ctx.mechanism, counts, *item, ctx.bids);
      if (feasible.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, feasible.size() - 1);
      const auto winner = feasible[pick(rng)];
      ++counts[winner];
      run[winner] += utility[winner][*item];
    }
    if (voided) continue;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += run[i];
      sum_sq[i] += run[i] * run[i];
    }
  }

  MonteCarloEstimate estimate;
  estimate.samples = samples;
  const double count = static_cast<double>(samples);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / count;
    const double variance = samples > 1 ? std::max(0.0, (sum_sq[i] - count * mean * mean) / (count - 1)) : 0.0;
    estimate.mean.push_back(mean);
    estimate.standard_error.push_back(std::sqrt(variance / count));
  }
  return estimate;
}

}  // namespace ofd
