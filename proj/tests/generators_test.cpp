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

#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "ofd/engine.hpp"
#include "ofd/generators.hpp"
#include "oracles.hpp"

namespace ofd {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ofd::Error";
  return ErrorCode::ParseError;
}

BipartiteGraph random_graph(std::size_t left, std::size_t right, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(density);
  std::vector<BipartiteGraph::Edge> edges;
  for (std::size_t u = 0; u < left; ++u) {
    for (std::size_t v = 0; v < right; ++v) {
      if (edge(rng)) edges.emplace_back(u, v);
    }
  }
  return BipartiteGraph(left, right, std::move(edges));
}

TEST(BipartiteGraph, RejectsBadEdges) {
  EXPECT_EQ(code_of([] { BipartiteGraph(2, 2, {{0, 0}, {0, 0}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { BipartiteGraph(2, 2, {{2, 0}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { BipartiteGraph(2, 2, {{0, 2}}); }), ErrorCode::DimensionMismatch);
}

TEST(BipartiteGraph, DegreesAndShapes) {
  const auto k33 = complete_bipartite(3, 3);
  EXPECT_EQ(k33.edges().size(), 9U);
  EXPECT_TRUE(k33.is_regular(3));
  EXPECT_FALSE(k33.is_subdivision_shaped());
  const auto c6 = even_cycle(3);
  EXPECT_TRUE(c6.is_regular(2));
  EXPECT_TRUE(c6.is_subdivision_shaped());
  EXPECT_TRUE(circulant_bipartite(4, {0, 1, 2}).is_regular(3));
  EXPECT_TRUE(circulant_bipartite(5, {0, 1, 3}).is_regular(3));
  // Two left vertices with the same neighbour pair.
  EXPECT_FALSE(BipartiteGraph(2, 2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}).is_subdivision_shaped());
  // A right vertex of degree 4.
  EXPECT_FALSE(BipartiteGraph(4, 4, {{0, 0}, {0, 1}, {1, 0}, {1, 2}, {2, 0}, {2, 3}, {3, 0}, {3, 1}})
                   .is_subdivision_shaped());
}

TEST(Reduction1, SupportReadings) {
  const auto c4 = even_cycle(2);
  const BipartiteGraph path(2, 2, {{0, 0}, {0, 1}, {1, 1}});
  const auto edge = reduction1_instance(path);
  const auto literal = reduction1_instance(path, SupportReading::Literal);
  EXPECT_EQ(edge.instance.distribution().matrix,
            (Matrix{{Rational(1, 2), Rational(1, 2)}, {Rational(0), Rational(1, 2)}}));
  for (const auto& row : literal.instance.distribution().matrix) {
    for (const auto& v : row) EXPECT_EQ(v, Rational(1, 2));
  }
  EXPECT_EQ(reduction1_instance(c4).instance.agents, 2U);
  EXPECT_EQ(code_of([] { reduction1_instance(complete_bipartite(2, 3)); }), ErrorCode::SideMismatch);
}

// Matching identity on every edge-restricted graph: each agent's expected
// utility is (1/M^M)(M/2) times the number of perfect matchings.
TEST(Reduction1, MatchingIdentityOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 1 + trial % 4;
    const auto g = random_graph(m, m, 0.6, rng);
    const auto r1 = reduction1_instance(g);
    Rational expected(static_cast<long long>(oracle::brute_perfect_matchings(g)));
    for (std::size_t k = 0; k < m; ++k) expected /= static_cast<long long>(m);
    expected *= Rational(static_cast<long long>(m), 2);
    for (const auto mech : {Mechanism::Like, Mechanism::BalancedLike}) {
      const auto report = outcome(QueryContext::make(r1.instance, mech));
      EXPECT_EQ(report.expected_utility[0], expected) << trial;
      EXPECT_EQ(report.expected_utility[1], expected) << trial;
    }
  }
}

TEST(Reduction2, ShapeOnK33) {
  const auto gadget = reduction2_instance(complete_bipartite(3, 3));
  const auto& instance = gadget.instance;
  EXPECT_EQ(instance.agents, 10U);
  EXPECT_EQ(instance.items, 11U);
  const auto a10 = gadget.agent("a10");
  for (std::size_t k = 0; k < instance.items; ++k) {
    const bool special = k == gadget.item("w") || k == gadget.item("x");
    EXPECT_EQ(instance.likes(a10, k), special);
  }
  EXPECT_EQ(instance.fixed_order().order.back(), gadget.item("x"));
  EXPECT_EQ(instance.fixed_order().order[9], gadget.item("w"));
  EXPECT_EQ(gadget.item_names[3], "u1_1");
}

TEST(Reduction2, StructuralAudit) {
  for (const auto& g : {complete_bipartite(3, 3), circulant_bipartite(4, {0, 1, 2}), circulant_bipartite(5, {0, 1, 3})}) {
    const auto gadget = reduction2_instance(g);
    const auto& instance = gadget.instance;
    ASSERT_EQ(instance.agents, 3 * g.left() + 1);
    ASSERT_EQ(instance.items, 3 * g.left() + 2);
    for (std::size_t i = 0; i < instance.agents; ++i) {
      std::size_t liked = 0;
      for (std::size_t k = 0; k < instance.items; ++k) liked += instance.likes(i, k) ? 1 : 0;
      EXPECT_LE(liked, 4U);
    }
    for (std::size_t k = 0; k < instance.items; ++k) {
      if (k == gadget.item("x")) continue;
      std::size_t likers = 0;
      for (std::size_t i = 0; i < instance.agents; ++i) likers += instance.likes(i, k) ? 1 : 0;
      EXPECT_LE(likers, 3U);
    }
  }
}

TEST(Reduction2, ManipVariantAddsZBeforeX) {
  const auto gadget = reduction2_manip_instance(complete_bipartite(3, 3));
  EXPECT_EQ(gadget.instance.items, 12U);
  EXPECT_EQ(gadget.item("z"), gadget.item("w") + 1);
  EXPECT_EQ(gadget.item("x"), gadget.item("z") + 1);
  EXPECT_TRUE(gadget.instance.likes(gadget.agent("a10"), gadget.item("z")));
}

TEST(Reduction2, Preconditions) {
  EXPECT_EQ(code_of([] { reduction2_instance(even_cycle(3)); }), ErrorCode::NotThreeRegular);
  EXPECT_EQ(code_of([] { reduction2_instance(complete_bipartite(3, 4)); }), ErrorCode::SideMismatch);
}

TEST(Reduction3, CountsOnC6) {
  const auto g = even_cycle(3);
  for (std::size_t r = 1; r <= 3; ++r) {
    const auto gadget = reduction3_instance(g, r);
    const auto size = 3 * 3 + 3 - r + 1;
    EXPECT_EQ(gadget.instance.agents, size);
    EXPECT_EQ(gadget.instance.items, size);
    const auto c = gadget.agent("c");
    EXPECT_TRUE(gadget.instance.likes(c, gadget.item("w")));
    if (r < 3) {
      EXPECT_TRUE(gadget.instance.likes(c, gadget.item("z" + std::to_string(3 - r))));
    }
  }
}

TEST(Reduction3, Preconditions) {
  EXPECT_EQ(code_of([] { reduction3_instance(complete_bipartite(3, 3), 1); }), ErrorCode::NotSubdivisionShaped);
  EXPECT_EQ(code_of([] { reduction3_instance(even_cycle(3), 0); }), ErrorCode::BadR);
  EXPECT_EQ(code_of([] { reduction3_instance(even_cycle(3), 4); }), ErrorCode::BadR);
}

TEST(SubsetReduction, ThresholdAndFlag) {
  const SubsetInstance s{{3, 5, 7, 9}, 12, 2};
  const auto out = reduction_subset_instance(s);
  EXPECT_EQ(out.threshold, Rational(1, 16) * 6);
  EXPECT_TRUE(out.subset_exists);
  EXPECT_EQ(out.labeled.instance.utilities[1][2], 7);
  EXPECT_EQ(code_of([] { reduction_subset_instance(SubsetInstance{{1, 2}, 3, 3}); }), ErrorCode::DimensionMismatch);
}

TEST(GraphOracles, PermanentMatchesPermutations) {
  std::mt19937_64 rng(7);
  EXPECT_EQ(count_perfect_matchings(complete_bipartite(3, 3)), 6);
  EXPECT_EQ(count_perfect_matchings(even_cycle(3)), 2);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto g = random_graph(n, n, 0.5, rng);
    EXPECT_EQ(count_perfect_matchings(g), Integer(oracle::brute_perfect_matchings(g))) << trial;
  }
}

TEST(GraphOracles, MinMaximalMatchingMatchesSubsets) {
  std::mt19937_64 rng(8);
  EXPECT_EQ(min_maximal_matching_size(even_cycle(3)), 2U);
  EXPECT_EQ(code_of([] { min_maximal_matching_size(BipartiteGraph(2, 2, {})); }), ErrorCode::EmptyGraph);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = random_graph(1 + trial % 4, 1 + (trial / 4) % 4, 0.5, rng);
    if (g.edges().empty()) continue;
    EXPECT_EQ(min_maximal_matching_size(g), oracle::brute_min_maximal_matching(g)) << trial;
  }
}

TEST(SetOracles, TableMatchesSubsets) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long long> value(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    SubsetInstance s;
    const auto size = 1 + trial % 7;
    for (int k = 0; k < size; ++k) s.values.push_back(value(rng));
    s.target = value(rng) * 2;
    s.cardinality = 1 + static_cast<std::size_t>(trial) % static_cast<std::size_t>(size + 1);
    EXPECT_EQ(subset_sum_bc(s), oracle::brute_subset_sum(s)) << trial;
  }
}

TEST(RandomInstance, DeterministicAndWellFormed) {
  RandomInstanceSpec spec;
  spec.agents = 3;
  spec.items = 5;
  spec.binary = false;
  spec.distribution = true;
  const auto a = random_instance(spec, 42);
  const auto b = random_instance(spec, 42);
  EXPECT_EQ(a.utilities, b.utilities);
  EXPECT_EQ(a.distribution().matrix, b.distribution().matrix);
  for (std::size_t j = 0; j < spec.items; ++j) EXPECT_EQ(column_sum(a.distribution(), j), 1);
  spec.leave_residual = true;
  const auto c = random_instance(spec, 42);
  for (std::size_t j = 0; j < spec.items; ++j) EXPECT_LT(column_sum(c.distribution(), j), 1);
}

}  // namespace
}  // namespace ofd
