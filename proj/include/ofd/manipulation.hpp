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
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <thread>
#include <vector>

#include "ofd/core.hpp"
#include "ofd/engine.hpp"

// Strategic bidding against a fixed arrival order.
//
// One agent declares a bid row that may differ from their utilities while
// everybody else bids sincerely. The mechanism allocates on the declared
// bids; the manipulator's payoff is always their true expected utility.
//
// Both mechanisms only look at whether a bid is positive, so every bid row
// behaves exactly like its 0/1 positivity pattern. The best-response search
// therefore ranges over the 2^m binary rows and nothing else.

namespace ofd {

struct ManipulationQuery {
  Instance instance;
  Mechanism mechanism = Mechanism::BalancedLike;
  std::size_t agent = 0;
  std::vector<Rational> sincere;    // defaults to the agent's utility row
  std::vector<Rational> deviation;  // the declared row
  Rational threshold = 0;           // for the necessary question
  bool strict = false;              // ask gain > threshold instead of >=
  EngineOptions options;

  static ManipulationQuery make(Instance instance, Mechanism mechanism, std::size_t agent,
                                std::vector<Rational> deviation) {
    ManipulationQuery q;
    q.sincere = instance.utilities.at(agent);
    q.instance = std::move(instance);
    q.mechanism = mechanism;
    q.agent = agent;
    q.deviation = std::move(deviation);
    return q;
  }
};

struct ManipulationReport {
  std::size_t agent = 0;
  Rational sincere_utility;
  Rational deviated_utility;
  Rational gain;
  std::vector<Rational> best_response_row;  // filled by the search only
};

namespace detail {

inline void require_bid_row(const Instance& instance, const std::vector<Rational>& row) {
  if (row.size() != instance.items) {
    throw Error(ErrorCode::DimensionMismatch, "bid row has " + std::to_string(row.size()) + " entries for " +
                                                  std::to_string(instance.items) + " items");
  }
  for (const auto& v : row) {
    if (v < 0) throw Error(ErrorCode::NegativeValue, "bid " + to_string(v));
  }
}

}  // namespace detail

/// True expected utility of `agent` when they declare `row` and the others
/// bid sincerely.
inline Rational utility_under_bids(const Instance& instance, Mechanism mechanism, std::size_t agent,
                                   const std::vector<Rational>& row, const EngineOptions& options = {}) {
  if (!instance.has_fixed_order()) {
    throw Error(ErrorCode::WrongArrivalModel, "manipulation analysis needs a fixed arrival order");
  }
  if (agent >= instance.agents) throw Error(ErrorCode::DimensionMismatch, "agent out of range");
  detail::require_bid_row(instance, row);
  auto ctx = QueryContext::make(instance, mechanism);
  ctx.bids.bids[agent] = row;
  ctx.options = options;
  return exact_utility(ctx, agent);
}

inline ManipulationReport evaluate_manipulation(const ManipulationQuery& q) {
  ManipulationReport report;
  report.agent = q.agent;
  report.sincere_utility = utility_under_bids(q.instance, q.mechanism, q.agent, q.sincere, q.options);
  report.deviated_utility = utility_under_bids(q.instance, q.mechanism, q.agent, q.deviation, q.options);
  report.gain = report.deviated_utility - report.sincere_utility;
  return report;
}

inline Rational exact_manipulation_gain(const ManipulationQuery& q) { return evaluate_manipulation(q).gain; }

/// gain >= threshold, or gain > threshold when the query is strict (the
/// "possible manipulation" question at threshold 0).
inline bool necessary_manipulation(const ManipulationQuery& q) {
  const auto gain = exact_manipulation_gain(q);
  return q.strict ? gain > q.threshold : gain >= q.threshold;
}

struct SearchOptions {
  std::size_t max_items = 16;
  unsigned threads = 0;  // 0 picks the hardware concurrency
  EngineOptions engine;
};

namespace detail {

inline std::vector<Rational> binary_row(std::uint64_t mask, std::size_t items) {
  std::vector<Rational> row(items, Rational(0));
  for (std::size_t k = 0; k < items; ++k) {
    if ((mask >> k) & 1U) row[k] = 1;
  }
  return row;
}

// Row order used to break ties: item 1 is the most significant position and
// a 0 sorts before a 1.
inline bool lexicographically_smaller(std::uint64_t a, std::uint64_t b, std::size_t items) {
  for (std::size_t k = 0; k < items; ++k) {
    const bool ak = (a >> k) & 1U;
    const bool bk = (b >> k) & 1U;
    if (ak != bk) return !ak;
  }
  return false;
}

}  // namespace detail

/// Exhaustive best response over binary bid rows. Among rows with maximal
/// utility the sincere pattern wins, then the lexicographically smallest.
inline ManipulationReport best_response_search(const Instance& instance, Mechanism mechanism, std::size_t agent,
                                               const SearchOptions& options = {}) {
  if (!instance.has_fixed_order()) {
    throw Error(ErrorCode::WrongArrivalModel, "best-response search needs a fixed arrival order");
  }
  if (agent >= instance.agents) throw Error(ErrorCode::DimensionMismatch, "agent out of range");
  const auto m = instance.items;
  if (m > options.max_items || m >= 63) {
    throw Error(ErrorCode::BudgetExceeded, "best-response search is capped at " +
                                               std::to_string(options.max_items) + " items");
  }
  const std::uint64_t rows = std::uint64_t{1} << m;

  EngineOptions engine = options.engine;
  engine.threads = 1;
  std::vector<Rational> value(rows);
  const unsigned workers =
      std::max(1U, options.threads != 0 ? options.threads : std::thread::hardware_concurrency());
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::uint64_t mask = w; mask < rows; mask += workers) {
        value[mask] = utility_under_bids(instance, mechanism, agent, detail::binary_row(mask, m), engine);
      }
    }));
  }
  for (auto& job : jobs) job.get();

  std::uint64_t sincere_mask = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (instance.utilities[agent][k] > 0) sincere_mask |= std::uint64_t{1} << k;
  }
  std::uint64_t best = sincere_mask;
  for (std::uint64_t mask = 0; mask < rows; ++mask) {
    if (value[mask] > value[best] ||
        (value[mask] == value[best] && best != sincere_mask && detail::lexicographically_smaller(mask, best, m))) {
      best = mask;
    }
  }

  ManipulationReport report;
  report.agent = agent;
  report.sincere_utility = utility_under_bids(instance, mechanism, agent, instance.utilities[agent], engine);
  report.deviated_utility = value[best];
  report.gain = report.deviated_utility - report.sincere_utility;
  report.best_response_row = detail::binary_row(best, m);
  return report;
}

/// No agent can gain by any declared row.
inline bool is_strategyproof_on_instance(const Instance& instance, Mechanism mechanism,
                                         const SearchOptions& options = {}) {
  for (std::size_t agent = 0; agent < instance.agents; ++agent) {
    if (best_response_search(instance, mechanism, agent, options).gain != 0) return false;
  }
  return true;
}

}  // namespace ofd
