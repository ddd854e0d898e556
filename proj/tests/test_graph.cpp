#include "layers/generators.hpp"
#include "layers/graph.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace {

using namespace layers;

// Symmetry, loop flag and handshake checks shared by every generator test.
void expect_well_formed(const Graph& g) {
  std::size_t degree_sum = 0;
  bool repeated = false;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    degree_sum += g.degree(v);
    auto nb = g.neighbors(v);
    ASSERT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    for (Vertex u : nb) {
      if (u == v) {
        repeated = true;
        continue;
      }
      EXPECT_EQ(g.multiplicity(u, v), g.multiplicity(v, u));
      if (g.multiplicity(u, v) > 1) repeated = true;
    }
  }
  EXPECT_EQ(degree_sum, 2 * g.edge_count());
  EXPECT_EQ(g.is_multigraph(), repeated);
}

std::size_t girth(const Graph& g) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.vertex_count();
  for (Vertex s = 0; s < n; ++s) {
    std::vector<std::size_t> dist(n, SIZE_MAX);
    std::vector<Vertex> parent(n, s);
    std::queue<Vertex> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const Vertex v = q.front();
      q.pop();
      for (Vertex u : g.neighbors(v)) {
        if (dist[u] == SIZE_MAX) {
          dist[u] = dist[v] + 1;
          parent[u] = v;
          q.push(u);
        } else if (parent[v] != u) {
          best = std::min(best, dist[u] + dist[v] + 1);
        }
      }
    }
  }
  return best;
}

TEST(CyclePlusMatching, SixVerticesIsCubic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cm = cycle_plus_matching(6, seed);
    EXPECT_EQ(cm.graph.edge_count(), 9u);
    for (Vertex v = 0; v < 6; ++v) EXPECT_EQ(cm.graph.degree(v), 3u);
    expect_well_formed(cm.graph);
  }
}

TEST(CyclePlusMatching, RejectsOddOrTiny) {
  EXPECT_THROW(cycle_plus_matching(5, 1), InvalidParameter);
  EXPECT_THROW(cycle_plus_matching(2, 1), InvalidParameter);
}

TEST(CyclePlusMatching, Deterministic) {
  EXPECT_EQ(cycle_plus_matching(10000, 42).graph.edges(), cycle_plus_matching(10000, 42).graph.edges());
  EXPECT_NE(cycle_plus_matching(10000, 42).graph.edges(), cycle_plus_matching(10000, 43).graph.edges());
}

TEST(CyclePlusMatching, CubicForEverySeedAndSize) {
  for (std::size_t n = 4; n <= 40; n += 2)
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto cm = cycle_plus_matching(n, seed);
      for (Vertex v = 0; v < n; ++v) ASSERT_EQ(cm.graph.degree(v), 3u);
      ASSERT_EQ(cm.matching.size(), n / 2);
      expect_well_formed(cm.graph);
    }
}

TEST(ConfigurationModel, TwoCubicVertices) {
  const Graph g = configuration_model({{3, 2}}, 7);
  EXPECT_EQ(g.vertex_count(), 2u);
  EXPECT_EQ(g.degree(0), 3u);
  EXPECT_EQ(g.degree(1), 3u);
  expect_well_formed(g);
}

TEST(ConfigurationModel, RejectsOddSum) { EXPECT_THROW(configuration_model({{1, 3}}, 1), InvalidParameter); }

TEST(ConfigurationModel, DegreesExactForEverySeed) {
  const DegreeSequence seq{{1, 5}, {2, 7}, {3, 3}, {5, 2}};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = configuration_model(seq, seed);
    const auto degrees = seq.expand();
    for (Vertex v = 0; v < g.vertex_count(); ++v) ASSERT_EQ(g.degree(v), degrees[v]);
    expect_well_formed(g);
  }
}

// Exact expected loop count at one vertex for four degree-3 vertices, by
// walking every perfect matching of the 12 half-edges.
double enumerated_loops_per_vertex() {
  std::vector<int> owner;
  for (int v = 0; v < 4; ++v) owner.insert(owner.end(), 3, v);
  std::vector<bool> used(owner.size(), false);
  std::uint64_t matchings = 0;
  std::uint64_t loops_at_zero = 0;
  std::function<void(int)> rec = [&](int loops) {
    std::size_t first = 0;
    while (first < used.size() && used[first]) ++first;
    if (first == used.size()) {
      ++matchings;
      loops_at_zero += static_cast<std::uint64_t>(loops);
      return;
    }
    used[first] = true;
    for (std::size_t j = first + 1; j < used.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      rec(loops + (owner[first] == 0 && owner[j] == 0 ? 1 : 0));
      used[j] = false;
    }
    used[first] = false;
  };
  rec(0);
  EXPECT_EQ(matchings, 10395u);
  return static_cast<double>(loops_at_zero) / static_cast<double>(matchings);
}

TEST(ConfigurationModel, LoopRateMatchesPairingEnumeration) {
  // At one degree-3 vertex, E[loops] * (3N - 1) does not depend on N, so the
  // four-vertex enumeration fixes the value at N = 1000.
  const double scaled = enumerated_loops_per_vertex() * 11.0;
  EXPECT_NEAR(scaled, 3.0, 1e-12);
  const std::uint64_t samples = 10000;
  const std::uint32_t n = 1000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double loops = static_cast<double>(configuration_model({{3, n}}, s).loop_count());
    sum += loops;
    sum_sq += loops * loops;
  }
  const double mean = sum / samples;
  const double sd = std::sqrt((sum_sq / samples - mean * mean) / samples);
  const double predicted = scaled / (3.0 * n - 1.0) * n;
  EXPECT_NEAR(mean, predicted, 3 * sd) << "sd " << sd;
}

TEST(CompleteBinaryTree, SmallCases) {
  const Graph t4 = complete_binary_tree(4);
  EXPECT_EQ(t4.vertex_count(), 3u);
  EXPECT_EQ(t4.degree(0), 2u);
  EXPECT_EQ(t4.degree(1), 1u);
  EXPECT_EQ(t4.degree(2), 1u);
  const Graph t2 = complete_binary_tree(2);
  EXPECT_EQ(t2.vertex_count(), 1u);
  EXPECT_EQ(t2.edge_count(), 0u);
}

TEST(CompleteBinaryTree, Counts) {
  const Graph t = complete_binary_tree(1024);
  EXPECT_EQ(t.vertex_count(), 1023u);
  std::size_t leaves = 0;
  for (Vertex v = 0; v < t.vertex_count(); ++v) leaves += t.degree(v) == 1 ? 1 : 0;
  EXPECT_EQ(leaves, 512u);
  EXPECT_EQ(t.vertex_count() - leaves, 511u);
  expect_well_formed(t);
}

TEST(CompleteBinaryTree, RejectsNonPower) {
  EXPECT_THROW(complete_binary_tree(6), InvalidParameter);
  EXPECT_THROW(complete_binary_tree(1), InvalidParameter);
}

TEST(GridBox, HalfWidthOne) {
  const Graph g = grid_box(1);
  const GridGeometry geom{1};
  EXPECT_EQ(g.vertex_count(), 9u);
  EXPECT_EQ(g.degree(geom.index({0, 0})), 4u);
  for (Coord c : {Coord{-1, -1}, Coord{1, -1}, Coord{-1, 1}, Coord{1, 1}}) EXPECT_EQ(g.degree(geom.index(c)), 2u);
}

TEST(GridBox, FortyEdgesAtHalfWidthTwo) {
  const Graph g = grid_box(2);
  EXPECT_EQ(g.vertex_count(), 25u);
  // 5 rows of 4 horizontal edges plus 5 columns of 4 vertical edges.
  EXPECT_EQ(g.edge_count(), 40u);
  expect_well_formed(g);
}

TEST(GridBox, CoordinateRoundTrip) {
  const GridGeometry geom{7};
  EXPECT_EQ(geom.coord(geom.index({0, 0})), (Coord{0, 0}));
  for (Vertex i = 0; i < geom.cell_count(); ++i) ASSERT_EQ(geom.index(geom.coord(i)), i);
  EXPECT_THROW(grid_box(0), InvalidParameter);
}

TEST(StarCollection, Counts) {
  const Graph one = star_collection(1, 3);
  EXPECT_EQ(one.vertex_count(), 4u);
  EXPECT_EQ(one.degree(0), 3u);
  const Graph two = star_collection(2, 2);
  EXPECT_EQ(two.vertex_count(), 6u);
  EXPECT_EQ(two.edge_count(), 4u);
  const Graph big = star_collection(100, 100);
  EXPECT_EQ(big.vertex_count(), 10100u);
  EXPECT_EQ(big.edge_count(), 10000u);
}

TEST(SubdivideEdges, SmallCases) {
  const Graph path = subdivide_edges(path_graph(2)).graph;
  EXPECT_EQ(path.vertex_count(), 4u);
  EXPECT_EQ(path.edge_count(), 3u);
  const auto tri = subdivide_edges(complete_graph(3));
  EXPECT_EQ(tri.graph.vertex_count(), 9u);
  for (Vertex v = 0; v < 9; ++v) EXPECT_EQ(tri.graph.degree(v), 2u);
  EXPECT_EQ(girth(tri.graph), 9u);
  EXPECT_EQ(tri.origin.size(), 6u);
}

TEST(SubdivideEdges, CubicCount) {
  // K_4 is 3-regular on m = 4 vertices: 3m/2 edges, two new vertices each.
  const auto s = subdivide_edges(complete_graph(4));
  EXPECT_EQ(s.graph.vertex_count(), 4u + 3u * 4u);
  EXPECT_THROW(subdivide_edges(Graph::from_edges(2, std::vector<Edge>{{0, 1}, {0, 1}})), UnsupportedInput);
}

TEST(SubdivideEdges, GirthAndDegreeProperty) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Graph g = cycle_plus_matching(12, seed).graph;
    if (g.is_multigraph()) continue;
    const auto s = subdivide_edges(g);
    EXPECT_GE(girth(s.graph), 3 * girth(g));
    EXPECT_EQ(s.graph.max_degree(), g.max_degree());
    for (Vertex v = 0; v < g.vertex_count(); ++v) EXPECT_EQ(s.graph.degree(v), g.degree(v));
    expect_well_formed(s.graph);
  }
}

TEST(DAryTree, Counts) {
  EXPECT_EQ(d_ary_tree(2, 0).vertex_count(), 1u);
  EXPECT_EQ(d_ary_tree(2, 2).vertex_count(), 7u);
  EXPECT_EQ(d_ary_tree(3, 4).vertex_count(), 121u);
  EXPECT_EQ(d_ary_tree(3, 4).degree(0), 3u);
}

TEST(EdgeList, RoundTrip) {
  const Graph g = cycle_plus_matching(30, 9).graph;
  std::stringstream io;
  write_edge_list(io, g);
  EXPECT_EQ(read_edge_list(io), g);
  const Graph multi = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {0, 1}, {2, 2}});
  std::stringstream io2;
  write_edge_list(io2, multi);
  EXPECT_EQ(io2.str().substr(0, 11), "3 3 multi\n0");
  EXPECT_EQ(read_edge_list(io2), multi);
}

TEST(EdgeList, Golden) {
  std::ifstream in(std::string(LAYERS_TEST_DATA) + "/petersen_subdivided.edges");
  ASSERT_TRUE(in);
  const Graph golden = read_edge_list(in);
  std::vector<Edge> outer;
  for (Vertex i = 0; i < 5; ++i) {
    outer.push_back({i, static_cast<Vertex>((i + 1) % 5)});
    outer.push_back({i, static_cast<Vertex>(i + 5)});
    outer.push_back({static_cast<Vertex>(i + 5), static_cast<Vertex>((i + 2) % 5 + 5)});
  }
  const Graph petersen = Graph::from_edges(10, outer);
  EXPECT_EQ(subdivide_edges(petersen).graph, golden);
}

TEST(EdgeList, Malformed) {
  std::istringstream bad_header("x y\n");
  EXPECT_THROW(read_edge_list(bad_header), ParseError);
  std::istringstream short_list("3 2\n0 1\n");
  EXPECT_THROW(read_edge_list(short_list), ParseError);
  std::istringstream out_of_range("2 1\n0 5\n");
  EXPECT_THROW(read_edge_list(out_of_range), Error);
}

TEST(InducedSubgraph, MapsBack) {
  const Graph g = cycle_graph(6);
  VertexMask m(6);
  for (Vertex v : {0u, 1u, 2u, 4u}) m.set(v);
  const auto sub = induced_subgraph(g, m);
  EXPECT_EQ(sub.graph.vertex_count(), 4u);
  EXPECT_EQ(sub.graph.edge_count(), 2u);
  EXPECT_EQ(sub.to_parent, (std::vector<Vertex>{0, 1, 2, 4}));
}

}  // namespace
