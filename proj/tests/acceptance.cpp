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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. All limits are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ofd/ofd.hpp"
#include "oracles.hpp"

namespace {

using namespace ofd;

constexpr double kOracleLikeSeconds = 10.0;
constexpr double kOracleDpSeconds = 10.0;
constexpr double kMatchingCountSeconds = 60.0;
constexpr double kSubdivisionSeconds = 120.0;
constexpr int kOracleInstances = 200;
constexpr int kStrategyproofInstances = 100;
constexpr int kEpsilonInstances = 50;
constexpr int kMonteCarloInstances = 10;
constexpr std::size_t kMonteCarloSamples = 100'000;
constexpr double kMonteCarloSigmas = 3.0;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  std::function<Verdict()> check;
};

Verdict fail(std::string why) { return {false, std::move(why)}; }

Verdict oracle_like() {
  for (int t = 0; t < kOracleInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 1 + t % 4;
    spec.items = 1 + (t / 4) % 6;
    spec.binary = t % 2 == 0;
    const auto ctx = QueryContext::make(random_instance(spec, 1000 + t), Mechanism::Like);
    const auto closed = like_closed_form(ctx);
    const auto enumerated = enumerate_fixed_order(ctx);
    if (closed.allocation != enumerated.allocation || closed.expected_utility != enumerated.expected_utility) {
      return fail("mismatch on instance " + std::to_string(t));
    }
  }
  return {true, std::to_string(kOracleInstances) + " instances equal"};
}

Verdict oracle_dp() {
  std::size_t widest = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 2;
    spec.items = 1 + t % 12;
    spec.binary = t % 2 == 0;
    spec.like_probability = 0.75;
    const auto ctx = QueryContext::make(random_instance(spec, 2000 + t), Mechanism::BalancedLike);
    const auto trace = two_agent_dp_trace(ctx);
    const auto enumerated = enumerate_fixed_order(ctx);
    if (trace.report.allocation != enumerated.allocation ||
        trace.report.expected_utility != enumerated.expected_utility) {
      return fail("mismatch on instance " + std::to_string(t));
    }
    for (const auto& round : trace.rounds) widest = std::max(widest, round.size());
  }
  if (widest > 2) return fail("frontier reached " + std::to_string(widest) + " states");
  return {true, std::to_string(kOracleInstances) + " instances equal, widest frontier " + std::to_string(widest)};
}

Verdict matching_count() {
  std::ostringstream detail;
  const std::vector<std::pair<std::string, BipartiteGraph>> graphs = {
      {"K33", complete_bipartite(3, 3)},
      {"K44-PM", circulant_bipartite(4, {0, 1, 2})},
      {"circ5{0,1,3}", circulant_bipartite(5, {0, 1, 3})},
  };
  bool pass = true;
  for (const auto& [name, g] : graphs) {
    const auto n = g.left();
    const auto gadget = reduction2_instance(g);
    const auto e = enumerate_allocations(QueryContext::make(gadget.instance, Mechanism::BalancedLike), 3 * n + 1);
    std::uint64_t perfect = 0;
    for (const auto& s : e.states) {
      bool one_each = true;
      for (const auto c : s.counts()) one_each = one_each && c == 1;
      perfect += one_each ? 1 : 0;
    }
    const auto expected = (std::uint64_t{1} << n) * oracle::brute_perfect_matchings(g);
    const bool permanent_agrees = count_perfect_matchings(g) == Integer(oracle::brute_perfect_matchings(g));
    pass = pass && perfect == expected && permanent_agrees;
    detail << name << " " << perfect << "/" << expected << " ";
  }
  return {pass, detail.str()};
}

Verdict matching_gadget_value() {
  const auto gadget = reduction2_instance(complete_bipartite(3, 3));
  const auto u = exact_utility(QueryContext::make(gadget.instance, Mechanism::BalancedLike), gadget.agent("a10"));
  const Rational expected = 1 + Rational(48, 27 * 8 * 10);
  return {u == expected && u == Rational(46, 45), "a10 = " + to_string(u)};
}

Verdict reduction1_identity() {
  std::ostringstream detail;
  bool pass = true;
  for (const auto& g : {even_cycle(2), complete_bipartite(3, 3)}) {
    const auto m = g.left();
    Rational expected(static_cast<long long>(oracle::brute_perfect_matchings(g)));
    for (std::size_t k = 0; k < m; ++k) expected /= static_cast<long long>(m);
    expected *= Rational(static_cast<long long>(m), 2);
    const auto r1 = reduction1_instance(g);
    for (const auto mech : {Mechanism::Like, Mechanism::BalancedLike}) {
      const auto report = outcome(QueryContext::make(r1.instance, mech));
      pass = pass && report.expected_utility[0] == expected && report.expected_utility[1] == expected;
      detail << "M=" << m << " " << to_string(mech) << " " << to_string(report.expected_utility[0]) << " ";
    }
  }
  return {pass, detail.str()};
}

Verdict subdivision_equivalence() {
  const auto g = even_cycle(3);
  const auto smallest = oracle::brute_min_maximal_matching(g);
  std::ostringstream detail;
  bool pass = smallest == 2 && min_maximal_matching_size(g) == smallest;
  for (std::size_t r = 1; r <= 3; ++r) {
    const auto gadget = reduction3_instance(g, r);
    const auto ctx = QueryContext::make(gadget.instance, Mechanism::BalancedLike);
    const bool possible = possible_item(ctx, gadget.agent("c"), gadget.item("w"));
    const auto report = outcome(ctx);
    const bool zero = report.allocation[gadget.agent("c")][gadget.item("w")] == 0;
    bool b_share = true;
    for (std::size_t b = 1; b <= g.right(); ++b) {
      b_share = b_share &&
                report.expected_utility[gadget.agent("b" + std::to_string(b))] >=
                    Rational(1, static_cast<long long>(g.right()));
    }
    pass = pass && possible == (smallest <= r) && possible == !zero && b_share == zero;
    detail << "r=" << r << " possible=" << possible << " b>=1/M=" << b_share << " ";
  }
  return {pass, detail.str()};
}

Verdict manipulation_values() {
  const auto gadget = reduction2_manip_instance(complete_bipartite(3, 3));
  const auto a10 = gadget.agent("a10");
  auto row = gadget.instance.utilities[a10];
  row[gadget.item("z")] = 0;
  const auto q = ManipulationQuery::make(gadget.instance, Mechanism::BalancedLike, a10, row);
  const auto report = evaluate_manipulation(q);
  const bool pass = report.sincere_utility == 2 && report.deviated_utility == Rational(46, 45) &&
                    exact_manipulation_gain(q) == Rational(-44, 45);
  return {pass, "sincere " + to_string(report.sincere_utility) + ", deviated " + to_string(report.deviated_utility) +
                    ", gain " + to_string(report.gain)};
}

Verdict necessary_manipulation_link() {
  std::ostringstream detail;
  bool pass = true;
  for (const auto& [r, expected] : {std::pair<std::size_t, bool>{1, true}, {2, false}}) {
    const auto gadget = reduction3_instance(even_cycle(3), r);
    const auto c = gadget.agent("c");
    auto row = gadget.instance.utilities[c];
    row[gadget.item("w")] = 0;
    auto q = ManipulationQuery::make(gadget.instance, Mechanism::BalancedLike, c, row);
    q.threshold = 0;
    const bool got = necessary_manipulation(q);
    pass = pass && got == expected;
    detail << "r=" << r << " " << (got ? "true" : "false") << " ";
  }
  return {pass, detail.str()};
}

Verdict strategyproofness() {
  for (int t = 0; t < kStrategyproofInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 2 + t % 3;
    spec.items = 2 + t % 5;
    spec.binary = t % 2 == 0;
    if (!is_strategyproof_on_instance(random_instance(spec, 3000 + t), Mechanism::Like)) {
      return fail("Like gains on instance " + std::to_string(t));
    }
  }
  for (int t = 0; t < kStrategyproofInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 2;
    spec.items = 2 + t % 6;
    spec.binary = true;
    if (!is_strategyproof_on_instance(random_instance(spec, 4000 + t), Mechanism::BalancedLike)) {
      return fail("Balanced Like (n=2, 0/1) gains on instance " + std::to_string(t));
    }
  }
  Instance witness;
  witness.agents = 3;
  witness.items = 4;
  witness.utilities = {{3, Rational(2, 3), 0, Rational(1, 3)}, {1, 0, 2, 0}, {0, Rational(1, 2), 4, 1}};
  witness.arrival = FixedOrder{{0, 2, 3, 1}};
  const auto report = best_response_search(validate_instance(witness), Mechanism::BalancedLike, 0);
  if (report.gain <= 0) return fail("pinned witness lost its gain");
  return {true, "no gain on " + std::to_string(2 * kStrategyproofInstances) + " instances; witness gain " +
                    to_string(report.gain)};
}

Verdict epsilon_relation() {
  std::size_t checked = 0;
  for (int t = 0; t < kEpsilonInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 2 + t % 3;
    spec.items = 2 + t % 4;
    spec.binary = t % 3 != 0;
    spec.distribution = true;
    spec.mixture = 1 + t % 4;
    spec.leave_residual = t % 2 == 1;
    const auto instance = random_instance(spec, 5000 + t);
    for (const auto mech : {Mechanism::Like, Mechanism::BalancedLike}) {
      const auto ctx = QueryContext::make(instance, mech);
      const auto brute = oracle::brute_force_outcome(instance, mech);
      const auto moments = moment_probabilities(ctx);
      for (std::size_t i = 0; i < instance.agents; ++i) {
        Rational eps;
        try {
          eps = epsilon_bound(ctx, i);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoPositiveBranch) throw;
          if (brute.min_positive_branch[i] != 0) return fail("NoPositiveBranch for a reachable agent");
          continue;
        }
        if (brute.min_positive_branch[i] != 0 && brute.min_positive_branch[i] < eps) {
          return fail("branch below epsilon on instance " + std::to_string(t));
        }
        for (const auto& row : moments) {
          if (row[i] > 0 && row[i] < eps) return fail("moment probability below epsilon on " + std::to_string(t));
        }
        ++checked;
      }
    }
  }
  return {true, std::to_string(checked) + " agent bounds hold"};
}

Verdict monte_carlo_sanity() {
  double worst = 0;
  for (int t = 0; t < kMonteCarloInstances; ++t) {
    RandomInstanceSpec spec;
    spec.agents = 2 + t % 3;
    spec.items = 3 + t % 3;
    spec.binary = t % 2 == 0;
    spec.distribution = t % 3 == 0;
    spec.leave_residual = t % 6 == 0;
    const auto mech = t % 2 == 0 ? Mechanism::BalancedLike : Mechanism::Like;
    const auto ctx = QueryContext::make(random_instance(spec, 6000 + t), mech);
    const auto exact = outcome(ctx);
    const auto estimate = monte_carlo_estimate(ctx, kMonteCarloSamples, 7000 + t);
    for (std::size_t i = 0; i < ctx.instance.agents; ++i) {
      const double diff = std::abs(estimate.mean[i] - to_double(exact.expected_utility[i]));
      const double se = estimate.standard_error[i];
      if (se == 0) {
        if (diff > 1e-12) return fail("zero-variance estimate off on instance " + std::to_string(t));
        continue;
      }
      worst = std::max(worst, diff / se);
      if (diff > kMonteCarloSigmas * se) {
        return fail("instance " + std::to_string(t) + " agent " + std::to_string(i + 1) + " off by " +
                    std::to_string(diff / se) + " SE");
      }
    }
  }
  std::ostringstream detail;
  detail.precision(3);
  detail << "worst deviation " << worst << " SE";
  return {true, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Like closed form equals enumeration", kOracleLikeSeconds, oracle_like},
      {2, "two-agent DP equals enumeration", kOracleDpSeconds, oracle_dp},
      {3, "perfect allocations = 2^N x perfect matchings", kMatchingCountSeconds, matching_count},
      {4, "matching gadget value 46/45", 0, matching_gadget_value},
      {5, "random-arrival matching identity", 0, reduction1_identity},
      {6, "subdivision gadget equivalence", kSubdivisionSeconds, subdivision_equivalence},
      {7, "manipulation values on the z gadget", 0, manipulation_values},
      {8, "necessary manipulation on the subdivision gadget", 0, necessary_manipulation_link},
      {9, "strategy-proofness sweeps and witness", 0, strategyproofness},
      {10, "epsilon lower bound", 0, epsilon_relation},
      {11, "Monte Carlo within 3 standard errors", 0, monte_carlo_sanity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = fail(std::string("threw: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.pass && c.time_limit > 0 && seconds > c.time_limit) {
      v = fail(v.detail + " but took longer than " + std::to_string(c.time_limit) + " s");
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), v.detail.c_str(),
                seconds);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
