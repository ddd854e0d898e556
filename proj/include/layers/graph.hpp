#pragma once

#include "layers/errors.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace layers {

using Vertex = std::uint32_t;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Coordinates of a grid box [-n, n]^2, indexed row-major with y outer.
struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

struct GridGeometry {
  int half_width = 0;

  int side() const noexcept { return 2 * half_width + 1; }
  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(side()) * static_cast<std::size_t>(side());
  }
  bool contains(Coord c) const noexcept {
    return c.x >= -half_width && c.x <= half_width && c.y >= -half_width &&
           c.y <= half_width;
  }
  Vertex index(Coord c) const noexcept {
    return static_cast<Vertex>((c.y + half_width) * side() + (c.x + half_width));
  }
  Coord coord(Vertex i) const noexcept {
    const int s = side();
    return {static_cast<int>(i) % s - half_width, static_cast<int>(i) / s - half_width};
  }
  bool on_boundary(Coord c) const noexcept {
    return std::max(std::abs(c.x), std::abs(c.y)) == half_width;
  }
  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Per-vertex membership flags; carrier for T_k sets and percolation outcomes.
struct VertexMask {
  std::vector<std::uint8_t> member;

  VertexMask() = default;
  explicit VertexMask(std::size_t n, bool value = false) : member(n, value ? 1 : 0) {}

  std::size_t size() const noexcept { return member.size(); }
  bool operator[](std::size_t v) const noexcept { return member[v] != 0; }
  void set(std::size_t v, bool value = true) noexcept { member[v] = value ? 1 : 0; }
  std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(member.begin(), member.end(), 1));
  }
  friend bool operator==(const VertexMask&, const VertexMask&) = default;
};

/// Immutable undirected (multi)graph in compressed adjacency form.
///
/// Neighbor lists are sorted. A self-loop at v contributes v twice to v's own
/// list, so degree sums equal twice the edge count.
class Graph {
 public:
  Graph() = default;

  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          std::optional<GridGeometry> grid = std::nullopt) {
    if (n > std::numeric_limits<Vertex>::max())
      throw SizeError("graph too large for 32-bit vertex indices");
    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (const Edge& e : edges) {
      if (e.u >= n || e.v >= n)
        throw InvalidParameter("edge endpoint out of range: (" + std::to_string(e.u) +
                               ", " + std::to_string(e.v) + ")");
      ++g.offsets_[e.u + 1];
      ++g.offsets_[e.v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.adjacency_.resize(g.offsets_.back());
    std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const Edge& e : edges) {
      g.adjacency_[fill[e.u]++] = e.v;
      g.adjacency_[fill[e.v]++] = e.u;
    }
    for (std::size_t v = 0; v < n; ++v) {
      auto first = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
      auto last = g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
      std::sort(first, last);
      if (std::adjacent_find(first, last) != last || std::find(first, last, v) != last)
        g.multigraph_ = true;
    }
    g.edge_count_ = edges.size();
    g.grid_ = grid;
    if (grid && grid->cell_count() != n)
      throw InvalidParameter("grid geometry does not match vertex count");
    return g;
  }

  std::size_t vertex_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edge_count_; }
  bool is_multigraph() const noexcept { return multigraph_; }
  const std::optional<GridGeometry>& grid() const noexcept { return grid_; }

  std::span<const Vertex> neighbors(Vertex v) const noexcept {
    return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(Vertex v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  std::size_t max_degree() const noexcept {
    std::size_t best = 0;
    for (Vertex v = 0; v < vertex_count(); ++v) best = std::max(best, degree(v));
    return best;
  }

  /// Each edge once with u <= v, in (u, v) lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (Vertex u = 0; u < vertex_count(); ++u) {
      std::size_t loops = 0;
      for (Vertex w : neighbors(u)) {
        if (w > u) out.push_back({u, w});
        else if (w == u && (loops++ % 2 == 0)) out.push_back({u, u});
      }
    }
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
      return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return out;
  }

  /// Number of parallel copies of edge (u, v); loops count once per loop.
  std::size_t multiplicity(Vertex u, Vertex v) const {
    auto nb = neighbors(u);
    auto [lo, hi] = std::equal_range(nb.begin(), nb.end(), v);
    const auto c = static_cast<std::size_t>(hi - lo);
    return u == v ? c / 2 : c;
  }

  bool adjacent(Vertex u, Vertex v) const { return multiplicity(u, v) > 0; }

  std::size_t loop_count() const {
    std::size_t c = 0;
    for (Vertex v = 0; v < vertex_count(); ++v) c += multiplicity(v, v);
    return c;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.adjacency_ == b.adjacency_ &&
           a.multigraph_ == b.multigraph_ && a.grid_ == b.grid_;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> adjacency_;
  std::size_t edge_count_ = 0;
  bool multigraph_ = false;
  std::optional<GridGeometry> grid_;
};

/// Degree multiplicities: (degree, count) pairs.
struct DegreeSequence {
  struct Entry {
    std::uint32_t degree = 0;
    std::uint32_t count = 0;
  };
  std::vector<Entry> entries;

  DegreeSequence() = default;
  DegreeSequence(std::initializer_list<Entry> e) : entries(e) {}

  static DegreeSequence from_graph(const Graph& g) {
    std::vector<std::uint32_t> counts;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      const auto d = g.degree(v);
      if (d >= counts.size()) counts.resize(d + 1, 0);
      ++counts[d];
    }
    DegreeSequence s;
    for (std::uint32_t d = 0; d < counts.size(); ++d)
      if (counts[d] > 0) s.entries.push_back({d, counts[d]});
    return s;
  }

  std::uint64_t vertex_count() const noexcept {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.count;
    return n;
  }
  std::uint64_t degree_sum() const noexcept {
    std::uint64_t s = 0;
    for (const auto& e : entries) s += std::uint64_t{e.degree} * e.count;
    return s;
  }
  /// One degree per vertex, in entry order.
  std::vector<std::uint32_t> expand() const {
    std::vector<std::uint32_t> out;
    out.reserve(vertex_count());
    for (const auto& e : entries) out.insert(out.end(), e.count, e.degree);
    return out;
  }
};

/// Vertex-induced subgraph with the map back to the parent's indices.
struct InducedSubgraph {
  Graph graph;
  std::vector<Vertex> to_parent;
};

inline InducedSubgraph induced_subgraph(const Graph& g, const VertexMask& mask) {
  if (mask.size() != g.vertex_count()) throw InvalidParameter("mask length mismatch");
  constexpr Vertex absent = std::numeric_limits<Vertex>::max();
  std::vector<Vertex> local(g.vertex_count(), absent);
  InducedSubgraph out;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (mask[v]) {
      local[v] = static_cast<Vertex>(out.to_parent.size());
      out.to_parent.push_back(v);
    }
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (local[e.u] != absent && local[e.v] != absent) edges.push_back({local[e.u], local[e.v]});
  out.graph = Graph::from_edges(out.to_parent.size(), edges);
  return out;
}

/// Same graph with every self-loop dropped.
inline Graph without_loops(const Graph& g) {
  std::vector<Edge> edges;
  for (const Edge& e : g.edges())
    if (e.u != e.v) edges.push_back(e);
  return Graph::from_edges(g.vertex_count(), edges, g.grid());
}

// --- edge-list text format: "n m [multi]" then m lines "u v" ---

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << g.vertex_count() << ' ' << g.edge_count();
  if (g.is_multigraph()) out << " multi";
  out << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

inline Graph read_edge_list(std::istream& in) {
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("edge list: missing header");
  std::istringstream header(line);
  long long n = -1;
  long long m = -1;
  header >> n >> m;
  if (!header || n < 0 || m < 0) throw ParseError("edge list: bad header '" + line + "'");
  std::string flag;
  bool multi = false;
  if (header >> flag) {
    if (flag != "multi") throw ParseError("edge list: unknown header flag '" + flag + "'");
    multi = true;
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    if (!next_line()) throw ParseError("edge list: expected " + std::to_string(m) + " edges");
    std::istringstream row(line);
    long long u = -1;
    long long v = -1;
    std::string extra;
    row >> u >> v;
    if (!row || u < 0 || v < 0 || u >= n || v >= n || (row >> extra))
      throw ParseError("edge list: bad edge line '" + line + "'");
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v)});
  }
  Graph g = Graph::from_edges(static_cast<std::size_t>(n), edges);
  if (g.is_multigraph() && !multi)
    throw ParseError("edge list: loops or parallel edges without 'multi' flag");
  return g;
}

}  // namespace layers
