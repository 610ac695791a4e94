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

// JSON formats. Indices are 1-based on the wire and 0-based in memory.
// Rationals travel as "p/q" strings (bare JSON integers are accepted on
// input); JSON floats are rejected.
//
// Instance:
//   {"agents": n, "items": m,
//    "utilities": [["p/q", ...], ...],                       // n rows of m
//    "arrival": {"type": "order", "order": [k1, ..., km]}
//             | {"type": "distribution", "matrix": [[...]]}} // matrix[k][j]
// Graph:   {"left": N, "right": M, "edges": [[i, j], ...]}
// Prefix:  {"arrived": [k, ...], "bundles": [[k, ...], ...]} // one per agent

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofd/core.hpp"
#include "ofd/engine.hpp"
#include "ofd/generators.hpp"
#include "ofd/manipulation.hpp"

namespace ofd {

using Json = nlohmann::json;

inline Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) {
    return j.is_number_unsigned() ? Rational(Integer(j.get<unsigned long long>()))
                                  : Rational(Integer(j.get<long long>()));
  }
  throw Error(ErrorCode::ParseError, "expected a rational string or integer, got " + j.dump());
}

inline Json rational_to_json(const Rational& r) { return to_string(r); }

namespace detail {

inline const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

inline std::size_t count_from_json(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

/// 1-based index on the wire to 0-based in memory.
inline std::size_t index_from_json(const Json& j, std::size_t limit, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<std::size_t>() > limit) {
    throw Error(ErrorCode::ParseError,
                std::string(what) + " index " + j.dump() + " outside [1, " + std::to_string(limit) + "]");
  }
  return j.get<std::size_t>() - 1;
}

inline Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of arrays");
  Matrix m;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " rows must be arrays");
    auto& out = m.emplace_back();
    for (const auto& v : row) out.push_back(rational_from_json(v));
  }
  return m;
}

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(rational_to_json(v));
    out.push_back(std::move(r));
  }
  return out;
}

inline Json rationals_to_json(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const auto& r : v) out.push_back(rational_to_json(r));
  return out;
}

}  // namespace detail

/// Parses and validates an instance document.
inline Instance instance_from_json(const Json& j) {
  Instance instance;
  instance.agents = detail::count_from_json(detail::field(j, "agents"), "agents");
  instance.items = detail::count_from_json(detail::field(j, "items"), "items");
  instance.utilities = detail::matrix_from_json(detail::field(j, "utilities"), "utilities");
  const auto& arrival = detail::field(j, "arrival");
  const auto& type = detail::field(arrival, "type");
  if (type == "order") {
    const auto& order = detail::field(arrival, "order");
    if (!order.is_array()) throw Error(ErrorCode::ParseError, "order must be an array");
    FixedOrder fixed;
    for (const auto& k : order) {
      if (!k.is_number_integer() || k.get<long long>() < 1) {
        throw Error(ErrorCode::InvalidOrder, "order entries must be 1-based item indices");
      }
      fixed.order.push_back(k.get<std::size_t>() - 1);
    }
    instance.arrival = std::move(fixed);
  } else if (type == "distribution") {
    instance.arrival = Distribution{detail::matrix_from_json(detail::field(arrival, "matrix"), "matrix")};
  } else {
    throw Error(ErrorCode::ParseError, "arrival type must be 'order' or 'distribution'");
  }
  return validate_instance(std::move(instance));
}

inline Json instance_to_json(const Instance& instance) {
  Json j;
  j["agents"] = instance.agents;
  j["items"] = instance.items;
  j["utilities"] = detail::matrix_to_json(instance.utilities);
  if (instance.has_fixed_order()) {
    Json order = Json::array();
    for (const auto k : instance.fixed_order().order) order.push_back(k + 1);
    j["arrival"] = {{"type", "order"}, {"order", std::move(order)}};
  } else {
    j["arrival"] = {{"type", "distribution"}, {"matrix", detail::matrix_to_json(instance.distribution().matrix)}};
  }
  return j;
}

/// Instance document plus the generator's names; readers ignore the extras.
inline Json instance_to_json(const LabeledInstance& labeled) {
  auto j = instance_to_json(labeled.instance);
  j["agent_names"] = labeled.agent_names;
  j["item_names"] = labeled.item_names;
  return j;
}

inline BipartiteGraph graph_from_json(const Json& j) {
  const auto left = detail::count_from_json(detail::field(j, "left"), "left");
  const auto right = detail::count_from_json(detail::field(j, "right"), "right");
  const auto& edges = detail::field(j, "edges");
  if (!edges.is_array()) throw Error(ErrorCode::ParseError, "edges must be an array");
  std::vector<BipartiteGraph::Edge> out;
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::ParseError, "edge must be a pair");
    out.emplace_back(detail::index_from_json(e[0], left, "left vertex"),
                     detail::index_from_json(e[1], right, "right vertex"));
  }
  return BipartiteGraph(left, right, std::move(out));
}

inline Json graph_to_json(const BipartiteGraph& g) {
  Json edges = Json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u + 1, v + 1});
  return {{"left", g.left()}, {"right", g.right()}, {"edges", std::move(edges)}};
}

inline KnownPrefix prefix_from_json(const Json& j, const Instance& instance) {
  KnownPrefix prefix{{}, AllocationState(instance.agents)};
  for (const auto& k : detail::field(j, "arrived")) {
    prefix.arrived.push_back(detail::index_from_json(k, instance.items, "arrived item"));
  }
  const auto& bundles = detail::field(j, "bundles");
  if (!bundles.is_array() || bundles.size() != instance.agents) {
    throw Error(ErrorCode::InconsistentPrefix, "bundles must list one array per agent");
  }
  for (std::size_t i = 0; i < instance.agents; ++i) {
    for (const auto& k : bundles[i]) {
      try {
        prefix.state.give(i, detail::index_from_json(k, instance.items, "bundled item"));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ItemAlreadyAllocated) throw;
        throw Error(ErrorCode::InconsistentPrefix, e.what());
      }
    }
  }
  return prefix;
}

/// A bid row, either a bare array or {"bids": [...]}.
inline std::vector<Rational> bid_row_from_json(const Json& j) {
  const Json& row = j.is_object() ? detail::field(j, "bids") : j;
  if (!row.is_array()) throw Error(ErrorCode::ParseError, "bid row must be an array");
  std::vector<Rational> out;
  for (const auto& v : row) out.push_back(rational_from_json(v));
  return out;
}

inline Json report_to_json(const OutcomeReport& report) {
  return {{"method", std::string(to_string(report.method))},
          {"expected_utility", detail::rationals_to_json(report.expected_utility)},
          {"allocation", detail::matrix_to_json(report.allocation)},
          {"completion_probability", rational_to_json(report.completion_probability)}};
}

inline Json manipulation_to_json(const ManipulationReport& report) {
  Json j{{"agent", report.agent + 1},
         {"sincere_utility", rational_to_json(report.sincere_utility)},
         {"deviated_utility", rational_to_json(report.deviated_utility)},
         {"gain", rational_to_json(report.gain)}};
  j["best_response_row"] =
      report.best_response_row.empty() ? Json(nullptr) : detail::rationals_to_json(report.best_response_row);
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, "'" + path + "': " + e.what());
  }
}

}  // namespace ofd
