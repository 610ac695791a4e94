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
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ofd/core.hpp"

namespace ofd {

// Like:          every agent with a positive bid is feasible.
// Balanced Like: among positive bidders, only those holding the fewest items.
// The item then goes to one feasible agent chosen uniformly at random.

inline std::vector<std::size_t> feasible_agents(Mechanism mech, std::span<const std::size_t> counts,
                                                std::size_t item, const BidProfile& bids) {
  std::vector<std::size_t> feasible;
  std::size_t fewest = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < bids.agents(); ++i) {
    if (!bids.positive(i, item)) continue;
    if (mech == Mechanism::BalancedLike) {
      if (counts[i] > fewest) continue;
      if (counts[i] < fewest) {
        fewest = counts[i];
        feasible.clear();
      }
    }
    feasible.push_back(i);
  }
  return feasible;
}

inline std::vector<std::size_t> feasible_agents(Mechanism mech, const AllocationState& state,
                                                std::size_t item, const BidProfile& bids) {
  if (state.allocated(item)) {
    throw Error(ErrorCode::ItemAlreadyAllocated, "item " + std::to_string(item + 1));
  }
  return feasible_agents(mech, state.counts(), item, bids);
}

struct Transition {
  AllocationState successor;
  Rational probability;                  // conditional on the parent state
  std::optional<std::size_t> recipient;  // empty when nobody bids for the item
};

/// Successors of `state` once `item` is handed out. Each successor carries
/// the parent probability times the transition probability 1/f.
inline std::vector<Transition> allocation_step(Mechanism mech, const AllocationState& state,
                                               std::size_t item, const BidProfile& bids) {
  const auto feasible = feasible_agents(mech, state, item, bids);
  std::vector<Transition> out;
  if (feasible.empty()) {
    out.push_back({state, Rational(1), std::nullopt});
    return out;
  }
  const Rational share(1, static_cast<long long>(feasible.size()));
  out.reserve(feasible.size());
  for (const auto agent : feasible) {
    AllocationState next = state;
    next.give(agent, item);
    next.set_probability(state.probability() * share);
    out.push_back({std::move(next), share, agent});
  }
  return out;
}

}  // namespace ofd
