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

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ofd/error.hpp"
#include "ofd/rational.hpp"

namespace ofd {

using Matrix = std::vector<std::vector<Rational>>;

inline Matrix zero_matrix(std::size_t rows, std::size_t cols) {
  return Matrix(rows, std::vector<Rational>(cols, Rational(0)));
}

/// A set of item indices packed into one machine word. Allocation states
/// are enumerated exhaustively, so 64 items is far beyond any instance the
/// enumeration can finish anyway.
class ItemSet {
 public:
  static constexpr std::size_t kCapacity = 64;

  constexpr ItemSet() = default;
  constexpr explicit ItemSet(std::uint64_t bits) : bits_(bits) {}

  constexpr bool contains(std::size_t item) const { return (bits_ >> item) & 1U; }
  constexpr void insert(std::size_t item) { bits_ |= std::uint64_t{1} << item; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint64_t bits() const { return bits_; }

  std::vector<std::size_t> items() const {
    std::vector<std::size_t> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    }
    return out;
  }

  constexpr auto operator<=>(const ItemSet&) const = default;

 private:
  std::uint64_t bits_ = 0;
};

enum class Mechanism { Like, BalancedLike };

constexpr std::string_view to_string(Mechanism mech) {
  return mech == Mechanism::Like ? "like" : "balanced-like";
}

inline Mechanism parse_mechanism(std::string_view text) {
  if (text == "like") return Mechanism::Like;
  if (text == "balanced-like" || text == "balanced") return Mechanism::BalancedLike;
  throw Error(ErrorCode::ParseError, "unknown mechanism '" + std::string(text) + "'");
}

/// Items arrive in this exact sequence (0-based item indices).
struct FixedOrder {
  std::vector<std::size_t> order;
};

/// matrix[k][j] is the probability that item k arrives at moment j. A
/// column may sum to less than one; the shortfall is the chance that
/// nothing arrives at that moment.
struct Distribution {
  Matrix matrix;
};

using ArrivalModel = std::variant<FixedOrder, Distribution>;

struct Instance {
  std::size_t agents = 0;
  std::size_t items = 0;
  Matrix utilities;  // agents x items
  ArrivalModel arrival;

  bool likes(std::size_t agent, std::size_t item) const { return utilities[agent][item] > 0; }
  bool has_fixed_order() const { return std::holds_alternative<FixedOrder>(arrival); }
  const FixedOrder& fixed_order() const { return std::get<FixedOrder>(arrival); }
  const Distribution& distribution() const { return std::get<Distribution>(arrival); }
};

/// Declared bids. The mechanisms only ever look at whether a bid is
/// positive; utilities are always evaluated against Instance::utilities.
struct BidProfile {
  Matrix bids;  // agents x items

  static BidProfile sincere(const Instance& instance) { return BidProfile{instance.utilities}; }

  bool positive(std::size_t agent, std::size_t item) const { return bids[agent][item] > 0; }
  std::size_t agents() const { return bids.size(); }
};

class AllocationState {
 public:
  AllocationState() = default;
  explicit AllocationState(std::size_t agents)
      : bundles_(agents), counts_(agents, 0), probability_(1) {}

  const std::vector<ItemSet>& bundles() const { return bundles_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const ItemSet& bundle(std::size_t agent) const { return bundles_[agent]; }
  std::size_t count(std::size_t agent) const { return counts_[agent]; }
  std::size_t agents() const { return bundles_.size(); }
  const Rational& probability() const { return probability_; }

  void set_probability(Rational p) { probability_ = std::move(p); }

  bool allocated(std::size_t item) const {
    for (const auto& b : bundles_) {
      if (b.contains(item)) return true;
    }
    return false;
  }

  void give(std::size_t agent, std::size_t item) {
    if (item >= ItemSet::kCapacity) {
      throw Error(ErrorCode::DimensionMismatch, "item index beyond allocation state capacity");
    }
    if (allocated(item)) {
      throw Error(ErrorCode::ItemAlreadyAllocated, "item " + std::to_string(item + 1));
    }
    bundles_[agent].insert(item);
    ++counts_[agent];
  }

  Rational utility(std::size_t agent, const Matrix& utilities) const {
    Rational total = 0;
    for (const auto item : bundles_[agent].items()) total += utilities[agent][item];
    return total;
  }

 private:
  std::vector<ItemSet> bundles_;
  std::vector<std::size_t> counts_;
  Rational probability_ = 0;
};

enum class Method { ClosedForm, Dp, Enumeration, MonteCarlo };

constexpr std::string_view to_string(Method method) {
  switch (method) {
    case Method::ClosedForm: return "closed-form";
    case Method::Dp: return "dp";
    case Method::Enumeration: return "enumeration";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

struct OutcomeReport {
  Method method = Method::Enumeration;
  std::vector<Rational> expected_utility;  // per agent
  Matrix allocation;                       // agents x items, P(agent ends up holding item)
  Rational completion_probability = 1;     // mass of runs that were not voided
};

namespace detail {

inline void require_non_negative(const Matrix& m, std::string_view what) {
  for (const auto& row : m) {
    for (const auto& v : row) {
      if (v < 0) throw Error(ErrorCode::NegativeValue, std::string(what) + " entry " + to_string(v));
    }
  }
}

inline void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, std::string_view what) {
  if (m.size() != rows) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has " + std::to_string(m.size()) +
                                                  " rows, expected " + std::to_string(rows));
  }
  for (const auto& row : m) {
    if (row.size() != cols) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " row has " +
                                                    std::to_string(row.size()) + " entries, expected " +
                                                    std::to_string(cols));
    }
  }
}

}  // namespace detail

inline Rational column_sum(const Distribution& d, std::size_t moment) {
  Rational sum = 0;
  for (const auto& row : d.matrix) sum += row[moment];
  return sum;
}

/// Checks every structural invariant of an instance and returns it.
inline Instance validate_instance(Instance raw) {
  detail::require_shape(raw.utilities, raw.agents, raw.items, "utilities");
  detail::require_non_negative(raw.utilities, "utility");

  if (const auto* fixed = std::get_if<FixedOrder>(&raw.arrival)) {
    if (fixed->order.size() != raw.items) {
      throw Error(ErrorCode::InvalidOrder, "order has " + std::to_string(fixed->order.size()) +
                                               " entries for " + std::to_string(raw.items) + " items");
    }
    std::vector<bool> seen(raw.items, false);
    for (const auto item : fixed->order) {
      if (item >= raw.items) throw Error(ErrorCode::InvalidOrder, "item index out of range");
      if (seen[item]) throw Error(ErrorCode::InvalidOrder, "item " + std::to_string(item + 1) + " repeated");
      seen[item] = true;
    }
  } else {
    const auto& dist = std::get<Distribution>(raw.arrival);
    detail::require_shape(dist.matrix, raw.items, raw.items, "distribution");
    for (const auto& row : dist.matrix) {
      for (const auto& v : row) {
        if (v < 0 || v > 1) {
          throw Error(ErrorCode::InvalidDistribution, "entry " + to_string(v) + " outside [0,1]");
        }
      }
    }
    for (std::size_t j = 0; j < raw.items; ++j) {
      const auto sum = column_sum(dist, j);
      if (sum > 1) {
        throw Error(ErrorCode::InvalidDistribution,
                    "moment " + std::to_string(j + 1) + " sums to " + to_string(sum));
      }
    }
  }
  return raw;
}

inline void validate_bids(const Instance& instance, const BidProfile& bids) {
  detail::require_shape(bids.bids, instance.agents, instance.items, "bids");
  detail::require_non_negative(bids.bids, "bid");
}

/// The arrival model as a distribution; a fixed order becomes unit columns.
inline Distribution as_distribution(const Instance& instance) {
  if (!instance.has_fixed_order()) return instance.distribution();
  Distribution d{zero_matrix(instance.items, instance.items)};
  const auto& order = instance.fixed_order().order;
  for (std::size_t j = 0; j < order.size(); ++j) d.matrix[order[j]][j] = 1;
  return d;
}

}  // namespace ofd
