#pragma once

// Graph families. Labelings: cycles in cyclic order, trees in level order
// (children of i follow i contiguously), grids row-major with y outer.

#include "layers/errors.hpp"
#include "layers/graph.hpp"
#include "layers/random.hpp"

#include <bit>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace layers {

inline Graph cycle_graph(std::size_t n) {
  if (n < 3) throw InvalidParameter("cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % n)});
  return Graph::from_edges(n, edges);
}

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i)
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(i + 1)});
  return Graph::from_edges(n, edges);
}

inline Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>(j)});
  return Graph::from_edges(n, edges);
}

struct CyclePlusMatching {
  Graph graph;
  std::vector<Edge> matching;  // n/2 edges, u < v
};

/// n-cycle 0..n-1 plus a uniform perfect matching (shuffle, pair neighbors).
inline CyclePlusMatching cycle_plus_matching(std::size_t n, std::uint64_t seed) {
  if (n < 4 || n % 2 != 0)
    throw InvalidParameter("cycle_plus_matching: n must be even and >= 4, got " +
                           std::to_string(n));
  Engine rng = make_engine(seed, {0x6d61746368ULL});
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  shuffle(std::span<Vertex>(order), rng);

  CyclePlusMatching out;
  std::vector<Edge> edges;
  edges.reserve(n + n / 2);
  for (std::size_t i = 0; i < n; ++i)
    edges.push_back({static_cast<Vertex>(i), static_cast<Vertex>((i + 1) % n)});
  out.matching.reserve(n / 2);
  for (std::size_t i = 0; i < n; i += 2) {
    Edge e{std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1])};
    out.matching.push_back(e);
    edges.push_back(e);
  }
  out.graph = Graph::from_edges(n, edges);
  return out;
}

/// Uniform pairing of half-edges; loops and parallel edges are kept.
inline Graph configuration_model(const DegreeSequence& degrees, std::uint64_t seed) {
  if (degrees.degree_sum() % 2 != 0)
    throw InvalidParameter("configuration_model: odd degree sum " +
                           std::to_string(degrees.degree_sum()));
  const auto per_vertex = degrees.expand();
  std::vector<Vertex> half_edges;
  half_edges.reserve(degrees.degree_sum());
  for (std::size_t v = 0; v < per_vertex.size(); ++v)
    half_edges.insert(half_edges.end(), per_vertex[v], static_cast<Vertex>(v));
  Engine rng = make_engine(seed, {0x636f6e66ULL});
  shuffle(std::span<Vertex>(half_edges), rng);
  std::vector<Edge> edges;
  edges.reserve(half_edges.size() / 2);
  for (std::size_t i = 0; i < half_edges.size(); i += 2) edges.push_back({half_edges[i], half_edges[i + 1]});
  return Graph::from_edges(per_vertex.size(), edges);
}

/// n - 1 vertices on log2(n) levels; level i has 2^i vertices.
inline Graph complete_binary_tree(std::size_t n) {
  if (n < 2 || !std::has_single_bit(n))
    throw InvalidParameter("complete_binary_tree: n must be a power of two >= 2, got " +
                           std::to_string(n));
  const std::size_t count = n - 1;
  std::vector<Edge> edges;
  edges.reserve(count > 0 ? count - 1 : 0);
  for (std::size_t child = 1; child < count; ++child)
    edges.push_back({static_cast<Vertex>((child - 1) / 2), static_cast<Vertex>(child)});
  return Graph::from_edges(count, edges);
}

/// Induced 4-neighbor grid on [-n, n]^2 with coordinates attached.
inline Graph grid_box(int half_width) {
  if (half_width < 1) throw InvalidParameter("grid_box: half_width must be >= 1");
  const GridGeometry geom{half_width};
  std::vector<Edge> edges;
  for (int y = -half_width; y <= half_width; ++y)
    for (int x = -half_width; x <= half_width; ++x) {
      const Vertex v = geom.index({x, y});
      if (x < half_width) edges.push_back({v, geom.index({x + 1, y})});
      if (y < half_width) edges.push_back({v, geom.index({x, y + 1})});
    }
  return Graph::from_edges(geom.cell_count(), edges, geom);
}

/// star_count disjoint stars; star j has center j*(star_size+1).
inline Graph star_collection(std::size_t star_count, std::size_t star_size) {
  if (star_count == 0 || star_size == 0)
    throw InvalidParameter("star_collection: counts must be positive");
  const std::size_t block = star_size + 1;
  std::vector<Edge> edges;
  edges.reserve(star_count * star_size);
  for (std::size_t s = 0; s < star_count; ++s)
    for (std::size_t leaf = 1; leaf <= star_size; ++leaf)
      edges.push_back({static_cast<Vertex>(s * block), static_cast<Vertex>(s * block + leaf)});
  return Graph::from_edges(star_count * block, edges);
}

struct Subdivision {
  Graph graph;
  std::size_t original_vertex_count = 0;
  /// origin[i] is the source edge of new vertex original_vertex_count + i.
  std::vector<Edge> origin;
};

/// Every edge (u, v) becomes u - x_uv - y_uv - v. Vertices 0..n-1 keep
/// their index; edge e's new vertices are n + 2e (next to u) and n + 2e + 1.
inline Subdivision subdivide_edges(const Graph& g) {
  if (g.is_multigraph()) throw UnsupportedInput("subdivide_edges requires a simple graph");
  Subdivision out;
  const std::size_t n = g.vertex_count();
  out.original_vertex_count = n;
  const auto original = g.edges();
  std::vector<Edge> edges;
  edges.reserve(original.size() * 3);
  for (std::size_t i = 0; i < original.size(); ++i) {
    const auto x = static_cast<Vertex>(n + 2 * i);
    const auto y = static_cast<Vertex>(n + 2 * i + 1);
    edges.push_back({original[i].u, x});
    edges.push_back({x, y});
    edges.push_back({y, original[i].v});
    out.origin.push_back(original[i]);
    out.origin.push_back(original[i]);
  }
  out.graph = Graph::from_edges(n + 2 * original.size(), edges);
  return out;
}

/// Rooted tree, every internal vertex has d children, leaves at `depth`.
inline Graph d_ary_tree(std::size_t d, std::size_t depth) {
  if (d == 0) throw InvalidParameter("d_ary_tree: d must be positive");
  std::size_t count = 1;
  std::size_t level = 1;
  for (std::size_t i = 0; i < depth; ++i) {
    if (level > (std::size_t{1} << 31) / d) throw SizeError("d_ary_tree: too many vertices");
    level *= d;
    count += level;
    if (count > (std::size_t{1} << 31)) throw SizeError("d_ary_tree: too many vertices");
  }
  std::vector<Edge> edges;
  edges.reserve(count - 1);
  for (std::size_t child = 1; child < count; ++child)
    edges.push_back({static_cast<Vertex>((child - 1) / d), static_cast<Vertex>(child)});
  return Graph::from_edges(count, edges);
}

}  // namespace layers
