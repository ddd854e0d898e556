#pragma once

// Structural invariants of a (graph, ages) sample, and the replay file that
// carries a sample together with the name of the invariant to re-check.

#include "layers/components.hpp"
#include "layers/errors.hpp"
#include "layers/graph.hpp"
#include "layers/layers_model.hpp"

#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace layers {

struct InvariantResult {
  bool ok = true;
  std::string trace;  // human-readable description of the first violation
};

inline InvariantResult violation(std::string trace) { return {false, std::move(trace)}; }

/// No edge joins two vertices of T_1.
inline InvariantResult check_t1_independent(const Graph& g, const LayerLabeling& labels) {
  for (const Edge& e : g.edges())
    if (e.u != e.v && labels[e.u] == 1 && labels[e.v] == 1)
      return violation("T1 edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
  return {};
}

/// T_2 spans a forest; parallel edges inside T_2 count as a cycle.
inline InvariantResult check_t2_forest(const Graph& g, const LayerLabeling& labels) {
  UnionFind uf(g.vertex_count());
  for (const Edge& e : g.edges()) {
    if (e.u == e.v || labels[e.u] > 2 || labels[e.v] > 2) continue;
    const std::size_t copies = g.multiplicity(e.u, e.v);
    if (copies > 1 || !uf.unite(e.u, e.v))
      return violation("T2 cycle closed by edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
  }
  return {};
}

/// 1 <= layer(v) <= (loop-free degree of v) + 1.
inline InvariantResult check_layer_bounds(const Graph& g, const LayerLabeling& labels) {
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    std::size_t d = 0;
    for (Vertex u : g.neighbors(v)) d += u != v ? 1 : 0;
    if (labels[v] < 1 || labels[v] > d + 1)
      return violation("vertex " + std::to_string(v) + " layer " + std::to_string(labels[v]) +
                       " outside [1, " + std::to_string(d + 1) + "]");
  }
  return {};
}

/// T_k induces a k-degenerate subgraph for every k in 1..max_degree+1.
inline InvariantResult check_degeneracy(const Graph& g, const LayerLabeling& labels) {
  const auto top = static_cast<std::uint32_t>(g.max_degree() + 1);
  for (std::uint32_t k = 1; k <= top; ++k) {
    const auto tk = induced_tk(g, labels, k);
    const auto res = degeneracy_order(without_loops(tk.induced.graph), k);
    if (!res.ok) {
      std::string trace = "T" + std::to_string(k) + " not " + std::to_string(k) + "-degenerate; core:";
      for (Vertex v : res.core) trace += " " + std::to_string(tk.induced.to_parent[v]);
      return violation(trace);
    }
  }
  return {};
}

/// max |C_mon| >= max |T_2 component|.
inline InvariantResult check_monotone_domination(const Graph& g, const AgeAssignment& ages) {
  const auto pair = max_component_vs_max_monotone(g, ages);
  if (pair.largest_monotone_component < pair.largest_t2_component)
    return violation("max monotone component " + std::to_string(pair.largest_monotone_component) +
                     " < max T2 component " + std::to_string(pair.largest_t2_component));
  return {};
}

using InvariantFn = std::function<InvariantResult(const Graph&, const AgeAssignment&)>;

inline const std::map<std::string, InvariantFn>& invariant_registry() {
  static const std::map<std::string, InvariantFn> registry{
      {"t1_independent", [](const Graph& g, const AgeAssignment& a) { return check_t1_independent(g, compute_layers(g, a)); }},
      {"t2_forest", [](const Graph& g, const AgeAssignment& a) { return check_t2_forest(g, compute_layers(g, a)); }},
      {"layer_bounds", [](const Graph& g, const AgeAssignment& a) { return check_layer_bounds(g, compute_layers(g, a)); }},
      {"degeneracy", [](const Graph& g, const AgeAssignment& a) { return check_degeneracy(g, compute_layers(g, a)); }},
      {"monotone_domination", check_monotone_domination},
  };
  return registry;
}

inline InvariantResult evaluate_invariant(const std::string& name, const Graph& g, const AgeAssignment& ages) {
  const auto& reg = invariant_registry();
  if (name == "all") {
    for (const auto& [n, fn] : reg) {
      auto r = fn(g, ages);
      if (!r.ok) return {false, n + ": " + r.trace};
    }
    return {};
  }
  auto it = reg.find(name);
  if (it == reg.end()) throw InvalidParameter("unknown invariant '" + name + "'");
  return it->second(g, ages);
}

// --- replay files ---
//
//   invariant <name>
//   <edge list: "n m [multi]" then m lines "u v">
//   ages
//   <n ages, one per line>

struct ReplayCase {
  std::string invariant;
  Graph graph;
  AgeAssignment ages;
};

inline void write_replay(std::ostream& out, const ReplayCase& c) {
  out << "invariant " << c.invariant << '\n';
  write_edge_list(out, c.graph);
  out << "ages\n";
  write_ages(out, c.ages);
}

inline ReplayCase read_replay(std::istream& in) {
  ReplayCase c;
  std::string line;
  while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
  }
  std::istringstream head(line);
  std::string keyword;
  if (!(head >> keyword >> c.invariant) || keyword != "invariant")
    throw ParseError("replay: first line must be 'invariant <name>'");

  // The edge-list block runs until the "ages" line.
  std::string block;
  bool found_ages = false;
  while (std::getline(in, line)) {
    std::string trimmed = line;
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
    if (trimmed == "ages") {
      found_ages = true;
      break;
    }
    block += trimmed + '\n';
  }
  if (!found_ages) throw ParseError("replay: missing 'ages' section");
  std::istringstream graph_in(block);
  c.graph = read_edge_list(graph_in);
  c.ages = read_ages(in, c.graph.vertex_count());
  return c;
}

struct Diagnosis {
  std::string invariant;
  InvariantResult result;

  std::string describe() const {
    return invariant + ": " + (result.ok ? std::string("no violation") : "violation: " + result.trace);
  }
};

/// Re-evaluates the named invariant. Ties between neighbor ages surface as TieError.
inline Diagnosis replay(const ReplayCase& c) {
  compute_layers(c.graph, c.ages);
  return {c.invariant, evaluate_invariant(c.invariant, c.graph, c.ages)};
}

inline Diagnosis replay(std::istream& in) { return replay(read_replay(in)); }

}  // namespace layers
