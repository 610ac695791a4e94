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
#include <bit>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ofd/core.hpp"

namespace ofd {

/// Bipartite graph with left vertices 0..left-1 and right vertices
/// 0..right-1. Edges are stored sorted and unique.
class BipartiteGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  BipartiteGraph(std::size_t left, std::size_t right, std::vector<Edge> edges)
      : left_(left), right_(right), edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto [u, v] = edges_[e];
      if (u >= left_ || v >= right_) {
        throw Error(ErrorCode::DimensionMismatch, "edge endpoint out of range");
      }
      if (e > 0 && edges_[e - 1] == edges_[e]) {
        throw Error(ErrorCode::DimensionMismatch, "duplicate edge (" + std::to_string(u + 1) + "," +
                                                      std::to_string(v + 1) + ")");
      }
    }
  }

  std::size_t left() const { return left_; }
  std::size_t right() const { return right_; }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(std::size_t u, std::size_t v) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
  }

  /// Right neighbours of left vertex u, ascending.
  std::vector<std::size_t> neighbours_of_left(std::size_t u) const {
    std::vector<std::size_t> out;
    for (const auto& [a, b] : edges_) {
      if (a == u) out.push_back(b);
    }
    return out;
  }

  std::size_t left_degree(std::size_t u) const { return neighbours_of_left(u).size(); }

  std::size_t right_degree(std::size_t v) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [v](const Edge& e) { return e.second == v; }));
  }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (std::size_t u = 0; u < left_; ++u) d = std::max(d, left_degree(u));
    for (std::size_t v = 0; v < right_; ++v) d = std::max(d, right_degree(v));
    return d;
  }

  std::size_t min_degree() const {
    std::size_t d = edges_.size();
    for (std::size_t u = 0; u < left_; ++u) d = std::min(d, left_degree(u));
    for (std::size_t v = 0; v < right_; ++v) d = std::min(d, right_degree(v));
    return d;
  }

  bool is_regular(std::size_t k) const { return left_ > 0 && min_degree() == k && max_degree() == k; }

  /// Left degrees exactly 2, right degrees at most 3, left >= right, and no
  /// two left vertices with the same pair of neighbours.
  bool is_subdivision_shaped() const {
    if (left_ < right_ || left_ == 0) return false;
    std::set<std::vector<std::size_t>> pairs;
    for (std::size_t u = 0; u < left_; ++u) {
      auto nb = neighbours_of_left(u);
      if (nb.size() != 2) return false;
      if (!pairs.insert(std::move(nb)).second) return false;
    }
    for (std::size_t v = 0; v < right_; ++v) {
      if (right_degree(v) > 3) return false;
    }
    return true;
  }

 private:
  std::size_t left_;
  std::size_t right_;
  std::vector<Edge> edges_;
};

inline BipartiteGraph complete_bipartite(std::size_t left, std::size_t right) {
  std::vector<BipartiteGraph::Edge> edges;
  for (std::size_t u = 0; u < left; ++u) {
    for (std::size_t v = 0; v < right; ++v) edges.emplace_back(u, v);
  }
  return BipartiteGraph(left, right, std::move(edges));
}

/// Left vertex u joined to right vertices (u + s) mod n for each offset s.
inline BipartiteGraph circulant_bipartite(std::size_t n, const std::vector<std::size_t>& offsets) {
  std::vector<BipartiteGraph::Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto s : offsets) edges.emplace_back(u, (u + s) % n);
  }
  return BipartiteGraph(n, n, std::move(edges));
}

/// The cycle on 2n vertices (n >= 2), alternating sides.
inline BipartiteGraph even_cycle(std::size_t n) { return circulant_bipartite(n, {0, 1}); }

/// A generated instance with human-readable names for its agents and items
/// (both in index order).
struct LabeledInstance {
  Instance instance;
  std::vector<std::string> agent_names;
  std::vector<std::string> item_names;

  std::size_t agent(const std::string& name) const { return index_of(agent_names, name); }
  std::size_t item(const std::string& name) const { return index_of(item_names, name); }

 private:
  static std::size_t index_of(const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorCode::DimensionMismatch, "no element named '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

namespace detail {

inline std::vector<std::size_t> identity_order(std::size_t m) {
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

inline std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

}  // namespace detail

enum class SupportReading {
  EdgeRestricted,  // item k may arrive at moment j only along an edge (k, j)
  Literal,         // every item at every moment with mass 1/M
};

/// Two agents who like all M items; item k arrives at moment j with
/// probability 1/M. Left vertices are items, right vertices are moments.
inline LabeledInstance reduction1_instance(const BipartiteGraph& g,
                                           SupportReading reading = SupportReading::EdgeRestricted) {
  if (g.left() != g.right()) throw Error(ErrorCode::SideMismatch, "reduction needs equal sides");
  const auto m = g.left();
  Instance instance;
  instance.agents = 2;
  instance.items = m;
  instance.utilities = Matrix(2, std::vector<Rational>(m, Rational(1)));
  Distribution d{zero_matrix(m, m)};
  const Rational mass(1, static_cast<long long>(m));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      if (reading == SupportReading::Literal || g.has_edge(k, j)) d.matrix[k][j] = mass;
    }
  }
  instance.arrival = std::move(d);
  return {validate_instance(std::move(instance)), detail::numbered("a", 2), detail::numbered("o", m)};
}

namespace detail {

inline LabeledInstance edge_gadget(const BipartiteGraph& g, bool with_z) {
  if (g.left() != g.right()) throw Error(ErrorCode::SideMismatch, "gadget needs equal sides");
  if (!g.is_regular(3)) throw Error(ErrorCode::NotThreeRegular, "gadget needs a 3-regular graph");
  const auto n = g.left();
  LabeledInstance out;
  // Items in arrival order: v_1..v_N, u_11, u_12, .., u_N1, u_N2, w, [z,] x.
  for (std::size_t j = 1; j <= n; ++j) out.item_names.push_back("v" + std::to_string(j));
  for (std::size_t i = 1; i <= n; ++i) {
    out.item_names.push_back("u" + std::to_string(i) + "_1");
    out.item_names.push_back("u" + std::to_string(i) + "_2");
  }
  out.item_names.push_back("w");
  if (with_z) out.item_names.push_back("z");
  out.item_names.push_back("x");
  out.agent_names = numbered("a", 3 * n + 1);

  const auto items = out.item_names.size();
  auto& instance = out.instance;
  instance.agents = 3 * n + 1;
  instance.items = items;
  instance.utilities = zero_matrix(instance.agents, items);
  const auto x = out.item("x");
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = g.neighbours_of_left(i);
    for (std::size_t j = 0; j < 3; ++j) {
      auto& row = instance.utilities[3 * i + j];
      row[nb[j]] = 1;         // v_ij
      row[n + 2 * i] = 1;     // u_i1
      row[n + 2 * i + 1] = 1; // u_i2
      row[x] = 1;
    }
  }
  auto& special = instance.utilities[3 * n];
  special[out.item("w")] = 1;
  special[x] = 1;
  if (with_z) special[out.item("z")] = 1;
  instance.arrival = FixedOrder{identity_order(items)};
  out.instance = validate_instance(std::move(out.instance));
  return out;
}

}  // namespace detail

/// One agent per edge of a 3-regular graph plus one special agent; items
/// per right vertex, two per left vertex, then w and x.
inline LabeledInstance reduction2_instance(const BipartiteGraph& g) { return detail::edge_gadget(g, false); }

/// reduction2_instance with an extra item z, liked only by the special
/// agent, arriving between w and x.
inline LabeledInstance reduction2_manip_instance(const BipartiteGraph& g) { return detail::edge_gadget(g, true); }

/// Gadget on a subdivision-shaped graph: agent c can receive w only if the
/// graph has a maximal matching of at most r edges.
inline LabeledInstance reduction3_instance(const BipartiteGraph& g, std::size_t r) {
  if (!g.is_subdivision_shaped()) {
    throw Error(ErrorCode::NotSubdivisionShaped, "graph is not a degree-2/degree-<=3 subdivision");
  }
  const auto n = g.left();
  const auto m = g.right();
  if (r < 1 || r > n) throw Error(ErrorCode::BadR, "r must lie in [1, " + std::to_string(n) + "]");
  const auto zs = n - r;

  LabeledInstance out;
  for (std::size_t i = 1; i <= n; ++i) {
    out.agent_names.push_back("u" + std::to_string(i) + "_1");
    out.agent_names.push_back("u" + std::to_string(i) + "_2");
  }
  for (auto& name : detail::numbered("a", zs)) out.agent_names.push_back(std::move(name));
  for (auto& name : detail::numbered("b", m)) out.agent_names.push_back(std::move(name));
  out.agent_names.push_back("c");

  // Arrival order: x_1..x_N, v_1..v_M, y_1..y_N, z_1..z_{N-r}, w.
  for (auto& name : detail::numbered("x", n)) out.item_names.push_back(std::move(name));
  for (auto& name : detail::numbered("v", m)) out.item_names.push_back(std::move(name));
  for (auto& name : detail::numbered("y", n)) out.item_names.push_back(std::move(name));
  for (auto& name : detail::numbered("z", zs)) out.item_names.push_back(std::move(name));
  out.item_names.push_back("w");

  auto& instance = out.instance;
  instance.agents = out.agent_names.size();
  instance.items = out.item_names.size();
  instance.utilities = zero_matrix(instance.agents, instance.items);
  const std::size_t x0 = 0;
  const std::size_t v0 = n;
  const std::size_t y0 = n + m;
  const std::size_t z0 = 2 * n + m;
  const std::size_t w = instance.items - 1;

  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = g.neighbours_of_left(i);
    for (std::size_t j = 0; j < 2; ++j) {
      auto& row = instance.utilities[2 * i + j];
      row[x0 + i] = 1;
      row[v0 + nb[j]] = 1;
      row[y0 + i] = 1;
      for (std::size_t z = 0; z < zs; ++z) row[z0 + z] = 1;
    }
  }
  for (std::size_t a = 0; a < zs; ++a) {
    for (std::size_t i = 0; i < n; ++i) instance.utilities[2 * n + a][x0 + i] = 1;
  }
  for (std::size_t b = 0; b < m; ++b) instance.utilities[2 * n + zs + b][w] = 1;
  auto& c = instance.utilities.back();
  if (zs > 0) c[z0 + zs - 1] = 1;
  c[w] = 1;

  instance.arrival = FixedOrder{detail::identity_order(instance.items)};
  out.instance = validate_instance(std::move(out.instance));
  return out;
}

struct SubsetInstance {
  std::vector<long long> values;
  long long target = 0;       // b
  std::size_t cardinality = 1; // c
};

/// Is there a subset of exactly `cardinality` elements summing to `target`?
/// Pseudo-polynomial table over (count, reachable sums).
inline bool subset_sum_bc(const SubsetInstance& s) {
  if (s.cardinality > s.values.size()) return false;
  std::vector<std::set<long long>> reachable(s.cardinality + 1);
  reachable[0].insert(0);
  for (const auto value : s.values) {
    for (std::size_t c = s.cardinality; c >= 1; --c) {
      for (const auto sum : reachable[c - 1]) reachable[c].insert(sum + value);
    }
  }
  return reachable[s.cardinality].contains(s.target);
}

struct SubsetReduction {
  LabeledInstance labeled;
  Rational threshold;        // (1/M^c) * (b/2)
  bool subset_exists = false;
};

/// Two agents valuing item k at n_k, uniform arrival mass 1/M everywhere,
/// and the matching utility threshold.
inline SubsetReduction reduction_subset_instance(const SubsetInstance& s) {
  const auto m = s.values.size();
  if (s.cardinality < 1 || s.cardinality > m) {
    throw Error(ErrorCode::DimensionMismatch, "cardinality must lie in [1, |S|]");
  }
  Instance instance;
  instance.agents = 2;
  instance.items = m;
  instance.utilities = zero_matrix(2, m);
  for (std::size_t k = 0; k < m; ++k) {
    instance.utilities[0][k] = s.values[k];
    instance.utilities[1][k] = s.values[k];
  }
  const Rational mass(1, static_cast<long long>(m));
  instance.arrival = Distribution{Matrix(m, std::vector<Rational>(m, mass))};

  Rational threshold(s.target, 2);
  for (std::size_t i = 0; i < s.cardinality; ++i) threshold *= mass;

  SubsetReduction out;
  out.labeled = {validate_instance(std::move(instance)), detail::numbered("a", 2), detail::numbered("o", m)};
  out.threshold = threshold;
  out.subset_exists = subset_sum_bc(s);
  return out;
}

/// Number of perfect matchings: the permanent of the biadjacency matrix,
/// by Ryser's inclusion-exclusion over column subsets.
inline Integer count_perfect_matchings(const BipartiteGraph& g) {
  if (g.left() != g.right()) throw Error(ErrorCode::SideMismatch, "perfect matchings need equal sides");
  const auto n = g.left();
  if (n == 0) return 1;
  if (n >= 63) throw Error(ErrorCode::BudgetExceeded, "permanent is capped at 62 vertices per side");
  std::vector<std::uint64_t> row_mask(n, 0);
  for (const auto& [u, v] : g.edges()) row_mask[u] |= std::uint64_t{1} << v;

  Integer total = 0;
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t cols = 1; cols < subsets; ++cols) {
    Integer product = 1;
    for (std::size_t u = 0; u < n && product != 0; ++u) product *= std::popcount(row_mask[u] & cols);
    const bool negative = ((n - static_cast<std::size_t>(std::popcount(cols))) % 2) == 1;
    if (negative) {
      total -= product;
    } else {
      total += product;
    }
  }
  return total;
}

/// Smallest maximal matching, by exhaustive include/exclude search over the
/// edges with a maximality check at each leaf.
inline std::size_t min_maximal_matching_size(const BipartiteGraph& g) {
  const auto& edges = g.edges();
  if (edges.empty()) throw Error(ErrorCode::EmptyGraph, "graph has no edges");
  std::vector<bool> left_used(g.left(), false);
  std::vector<bool> right_used(g.right(), false);
  std::size_t best = edges.size() + 1;

  auto search = [&](auto&& self, std::size_t e, std::size_t size) -> void {
    if (size >= best) return;
    if (e == edges.size()) {
      for (const auto& [u, v] : edges) {
        if (!left_used[u] && !right_used[v]) return;  // could still be extended
      }
      best = size;
      return;
    }
    const auto [u, v] = edges[e];
    if (!left_used[u] && !right_used[v]) {
      left_used[u] = right_used[v] = true;
      self(self, e + 1, size + 1);
      left_used[u] = right_used[v] = false;
    }
    self(self, e + 1, size);
  };
  search(search, 0, 0);
  return best;
}

struct RandomInstanceSpec {
  std::size_t agents = 3;
  std::size_t items = 4;
  bool binary = true;            // 0/1 utilities, otherwise small rationals
  long long max_value = 5;       // numerator and denominator bound for rationals
  double like_probability = 0.6;
  bool distribution = false;     // arrival distribution instead of a fixed order
  std::size_t mixture = 3;       // permutations mixed into a distribution
  bool leave_residual = false;   // let distribution columns sum below one
};

/// Random desk-scale instance. Distributions are mixtures of permutation
/// matrices, so every column sums to at most one.
inline Instance random_instance(const RandomInstanceSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution like(spec.like_probability);
  std::uniform_int_distribution<long long> num(1, std::max(1LL, spec.max_value));
  Instance instance;
  instance.agents = spec.agents;
  instance.items = spec.items;
  instance.utilities = zero_matrix(spec.agents, spec.items);
  for (auto& row : instance.utilities) {
    for (auto& u : row) {
      if (!like(rng)) continue;
      u = spec.binary ? Rational(1) : Rational(num(rng), num(rng));
    }
  }
  auto order = detail::identity_order(spec.items);
  if (!spec.distribution) {
    std::shuffle(order.begin(), order.end(), rng);
    instance.arrival = FixedOrder{order};
    return validate_instance(std::move(instance));
  }
  Distribution d{zero_matrix(spec.items, spec.items)};
  std::vector<long long> weights;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, spec.mixture); ++t) weights.push_back(num(rng));
  long long total = std::accumulate(weights.begin(), weights.end(), 0LL);
  if (spec.leave_residual) total += num(rng);
  for (const auto weight : weights) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t j = 0; j < spec.items; ++j) d.matrix[order[j]][j] += Rational(weight, total);
  }
  instance.arrival = std::move(d);
  return validate_instance(std::move(instance));
}

}  // namespace ofd
