#pragma once

// The layers model: ages, layer labels L_k / T_k, the exact E|T_k| formula,
// degeneracy certificates, and plain site percolation.

#include "layers/errors.hpp"
#include "layers/graph.hpp"
#include "layers/random.hpp"
#include "layers/rational.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace layers {

/// Per-vertex ages in [0, 1). Their rank order is the permutation.
struct AgeAssignment {
  std::vector<double> ages;

  std::size_t size() const noexcept { return ages.size(); }
  double operator[](std::size_t v) const noexcept { return ages[v]; }
  friend bool operator==(const AgeAssignment&, const AgeAssignment&) = default;
};

/// layer[v] = 1 + number of strictly younger neighbors (with multiplicity).
struct LayerLabeling {
  std::vector<std::uint32_t> layer;

  std::size_t size() const noexcept { return layer.size(); }
  std::uint32_t operator[](std::size_t v) const noexcept { return layer[v]; }
  friend bool operator==(const LayerLabeling&, const LayerLabeling&) = default;
};

namespace detail {
inline bool has_neighbor_tie(const Graph& g, const std::vector<double>& ages, Vertex v) {
  for (Vertex u : g.neighbors(v))
    if (u != v && ages[u] == ages[v]) return true;
  return false;
}
}  // namespace detail

/// Independent U[0,1) ages. A vertex whose age ties with a neighbor is
/// redrawn from the same stream until the tie clears.
inline AgeAssignment sample_ages(const Graph& g, std::uint64_t seed) {
  Engine rng = make_engine(seed, {0x61676573ULL});
  AgeAssignment out;
  out.ages.resize(g.vertex_count());
  for (double& a : out.ages) a = uniform01(rng);
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    while (detail::has_neighbor_tie(g, out.ages, v)) out.ages[v] = uniform01(rng);
  return out;
}

/// perm[i] is the vertex at position i (earliest first); it gets age (i+1)/(n+1).
inline AgeAssignment permutation_to_ages(std::span<const Vertex> perm) {
  const std::size_t n = perm.size();
  std::vector<std::uint8_t> seen(n, 0);
  AgeAssignment out;
  out.ages.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = perm[i];
    if (v >= n || seen[v]) throw InvalidParameter("permutation_to_ages: not a bijection");
    seen[v] = 1;
    out.ages[v] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
  }
  return out;
}

/// Vertices sorted by increasing age (stable on ties).
inline std::vector<Vertex> ages_to_rank(const AgeAssignment& ages) {
  std::vector<Vertex> order(ages.size());
  std::iota(order.begin(), order.end(), Vertex{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Vertex a, Vertex b) { return ages[a] < ages[b]; });
  return order;
}

/// Self-loops are skipped; parallel edges count once per copy.
inline LayerLabeling compute_layers(const Graph& g, const AgeAssignment& ages) {
  if (ages.size() != g.vertex_count()) throw InvalidParameter("compute_layers: size mismatch");
  LayerLabeling out;
  out.layer.resize(g.vertex_count());
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    std::uint32_t younger = 0;
    const double xv = ages[v];
    for (Vertex u : g.neighbors(v)) {
      if (u == v) continue;
      if (ages[u] == xv) throw TieError(std::min(u, v), std::max(u, v));
      younger += ages[u] < xv ? 1U : 0U;
    }
    out.layer[v] = younger + 1;
  }
  return out;
}

/// Vertices with layer <= k (T_k); k = 0 gives the empty set.
inline VertexMask layers_up_to(const LayerLabeling& labels, std::uint32_t k) {
  VertexMask m(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) m.set(v, labels[v] <= k);
  return m;
}

/// Vertices with layer exactly k (L_k).
inline VertexMask layer_exactly(const LayerLabeling& labels, std::uint32_t k) {
  VertexMask m(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) m.set(v, labels[v] == k);
  return m;
}

struct TkSubgraph {
  VertexMask mask;
  InducedSubgraph induced;
};

inline TkSubgraph induced_tk(const Graph& g, const LayerLabeling& labels, std::uint32_t k) {
  if (k == 0) throw InvalidParameter("induced_tk: k must be >= 1");
  TkSubgraph out;
  out.mask = layers_up_to(labels, k);
  out.induced = induced_subgraph(g, out.mask);
  return out;
}

/// Exact sum over v of min(1, k / (d_v + 1)).
inline Rational expected_tk_size(const Graph& g, std::uint32_t k) {
  if (k == 0) throw InvalidParameter("expected_tk_size: k must be >= 1");
  std::vector<std::uint64_t> by_degree;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const auto d = g.degree(v);
    if (d >= by_degree.size()) by_degree.resize(d + 1, 0);
    ++by_degree[d];
  }
  Rational total = 0;
  for (std::size_t d = 0; d < by_degree.size(); ++d) {
    if (by_degree[d] == 0) continue;
    if (k >= d + 1) total += Rational(BigInt(by_degree[d]));
    else total += Rational(BigInt(by_degree[d]) * k, BigInt(d + 1));
  }
  return total;
}

/// Wei's lower bound on the independence number: sum of 1 / (d_v + 1).
inline Rational wei_bound(const Graph& g) { return expected_tk_size(g, 1); }

struct DegeneracyResult {
  bool ok = false;
  /// Removal order; complete when ok.
  std::vector<Vertex> order;
  /// Vertices left when every remaining vertex has degree >= k.
  std::vector<Vertex> core;
};

/// Min-degree peeling. Succeeds iff the graph is k-degenerate (every subgraph
/// has a vertex of degree <= k - 1); otherwise reports the stuck core.
/// Loops count 2 toward degree, parallel edges once per copy.
inline DegeneracyResult degeneracy_order(const Graph& g, std::uint32_t k) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (Vertex v = 0; v < n; ++v) {
    deg[v] = g.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }
  // Bucket queue keyed by current degree; stale entries are skipped.
  std::vector<std::vector<Vertex>> buckets(max_deg + 1);
  for (Vertex v = 0; v < n; ++v) buckets[deg[v]].push_back(v);
  std::vector<std::uint8_t> removed(n, 0);
  DegeneracyResult out;
  out.order.reserve(n);
  std::size_t cursor = 0;
  while (out.order.size() < n) {
    while (cursor < buckets.size() && buckets[cursor].empty()) ++cursor;
    Vertex v = buckets[cursor].back();
    buckets[cursor].pop_back();
    if (removed[v] || deg[v] != cursor) continue;
    if (cursor + 1 > k) break;
    removed[v] = 1;
    out.order.push_back(v);
    for (Vertex u : g.neighbors(v)) {
      if (u == v || removed[u]) continue;
      --deg[u];
      buckets[deg[u]].push_back(u);
      if (deg[u] < cursor) cursor = deg[u];
    }
  }
  out.ok = out.order.size() == n;
  if (!out.ok)
    for (Vertex v = 0; v < n; ++v)
      if (!removed[v]) out.core.push_back(v);
  return out;
}

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidParameter(std::string(what) + ": probability outside [0, 1]");
}

/// Keep each masked vertex independently with probability p, drawing from rng
/// in vertex order. Unmasked vertices stay out and consume no randomness.
inline VertexMask thin_mask(const VertexMask& mask, double p, Engine& rng) {
  check_probability(p, "thin_mask");
  VertexMask out(mask.size());
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) out.set(v, bernoulli(rng, p));
  return out;
}

/// G_p: every vertex retained independently with probability p.
inline VertexMask site_percolation(const Graph& g, double p, std::uint64_t seed) {
  check_probability(p, "site_percolation");
  Engine rng = make_engine(seed, {0x70657263ULL});
  return thin_mask(VertexMask(g.vertex_count(), true), p, rng);
}

// --- ages text format: one age per line, shortest round-trip decimal ---

inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void write_ages(std::ostream& out, const AgeAssignment& ages) {
  for (double a : ages.ages) out << format_double(a) << '\n';
}

inline AgeAssignment read_ages(std::istream& in, std::size_t expected = static_cast<std::size_t>(-1)) {
  AgeAssignment out;
  std::string line;
  while (out.size() < expected && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    double a = 0;
    auto res = std::from_chars(line.data(), line.data() + line.size(), a);
    if (res.ec != std::errc() || res.ptr != line.data() + line.size())
      throw ParseError("ages: bad line '" + line + "'");
    if (!(a >= 0.0 && a < 1.0)) throw ParseError("ages: value outside [0, 1): '" + line + "'");
    out.ages.push_back(a);
  }
  if (expected != static_cast<std::size_t>(-1) && out.size() != expected)
    throw ParseError("ages: expected " + std::to_string(expected) + " values, got " +
                     std::to_string(out.size()));
  return out;
}

}  // namespace layers
