#include "layers/generators.hpp"
#include "layers/stats.hpp"
#include "layers/treewidth.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

namespace {

using namespace layers;

TEST(MolloyReed, ExactValues) {
  for (std::uint32_t d = 1; d <= 6; ++d) {
    const Rational q = molloy_reed_q({{{d, make_rational(1)}}});
    EXPECT_EQ(q, make_rational(static_cast<long long>(d) * (static_cast<long long>(d) - 2)));
    EXPECT_EQ(q > 0, d >= 3);
  }
  const MolloyReedInput worst{{{1, make_rational(21, 30)}, {2, make_rational(5, 30)},
                               {3, make_rational(2, 30)}, {4, make_rational(2, 30)}}};
  EXPECT_EQ(molloy_reed_q(worst), make_rational(1, 30));
  EXPECT_EQ(molloy_reed_q({{{1, make_rational(1)}}}), make_rational(-1));
}

TEST(MolloyReed, RejectsBadFractions) {
  EXPECT_THROW(molloy_reed_q({{{1, make_rational(1, 2)}, {3, make_rational(1, 3)}}}), InvalidParameter);
  EXPECT_THROW(molloy_reed_q({{{1, make_rational(3, 2)}, {3, make_rational(-1, 2)}}}), InvalidParameter);
  EXPECT_THROW(MolloyReedInput::from_counts({}), InvalidParameter);
}

TEST(MolloyReed, FromDegreeSequence) {
  const auto in = MolloyReedInput::from_degree_sequence({{1, 21}, {2, 5}, {3, 2}, {4, 2}});
  EXPECT_EQ(molloy_reed_q(in), make_rational(1, 30));
}

long long q_sum(std::uint32_t d) { return static_cast<long long>(d) * (static_cast<long long>(d) - 2); }

TEST(Smoothing, PairExamples) {
  const auto a = smooth_degree_pair(3, 5);
  EXPECT_EQ(a.low, 4u);
  EXPECT_EQ(a.high, 4u);
  EXPECT_EQ(a.q_decrease, 2u);
  const auto b = smooth_degree_pair(1, 3);
  EXPECT_EQ(b.low, 2u);
  EXPECT_EQ(b.high, 2u);
  EXPECT_EQ(b.q_decrease, 2u);
  const auto c = smooth_degree_pair(2, 7);
  EXPECT_EQ(c.low, 3u);
  EXPECT_EQ(c.high, 6u);
  EXPECT_EQ(c.q_decrease, 8u);
  EXPECT_EQ(q_sum(2) + q_sum(7) - q_sum(3) - q_sum(6), 8);
  EXPECT_THROW(smooth_degree_pair(3, 4), InvalidParameter);
  EXPECT_THROW(smooth_degree_pair(5, 2), InvalidParameter);
}

TEST(Smoothing, DeltaMatchesDirectEvaluation) {
  for (std::uint32_t d = 0; d < 12; ++d)
    for (std::uint32_t e = d + 2; e < 20; ++e) {
      const auto s = smooth_degree_pair(d, e);
      ASSERT_EQ(static_cast<long long>(s.q_decrease), q_sum(d) + q_sum(e) - q_sum(s.low) - q_sum(s.high));
    }
}

TEST(Smoothing, FixpointIsBalanced) {
  Engine rng = make_engine(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::uint32_t> deg(1 + uniform_below(rng, 30));
    for (auto& d : deg) d = static_cast<std::uint32_t>(uniform_below(rng, 15));
    const auto out = smooth_degree_sequence(deg);
    ASSERT_EQ(out.size(), deg.size());
    EXPECT_EQ(std::accumulate(out.begin(), out.end(), 0ULL), std::accumulate(deg.begin(), deg.end(), 0ULL));
    EXPECT_LE(out.back() - out.front(), 1u);
    long long before = 0, after = 0;
    for (auto d : deg) before += q_sum(d);
    for (auto d : out) after += q_sum(d);
    EXPECT_LE(after, before);
  }
}

TEST(AuxiliaryH, DegreesAndTotals) {
  const std::size_t n = 2000;
  const Graph cycle = cycle_graph(n);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto labels = compute_layers(cycle, sample_ages(cycle, seed));
    const auto cm = cycle_plus_matching(n, seed + 100);
    const auto h = build_auxiliary_h(labels, cm.matching);
    const std::size_t u1_total = std::accumulate(h.u1_degrees.begin(), h.u1_degrees.end(), std::size_t{0});
    EXPECT_EQ(u1_total + h.u2_count, n);
    std::size_t degree_sum = 0;
    for (Vertex v = 0; v < h.multigraph.vertex_count(); ++v) degree_sum += h.multigraph.degree(v);
    EXPECT_EQ(degree_sum, n);
    for (std::size_t i = 0; i < h.u1_degrees.size(); ++i) EXPECT_EQ(h.multigraph.degree(static_cast<Vertex>(i)), h.u1_degrees[i]);
    for (std::size_t i = h.u1_degrees.size(); i < h.vertex_count(); ++i) EXPECT_EQ(h.multigraph.degree(static_cast<Vertex>(i)), 1u);
  }
}

TEST(AuxiliaryH, DegreeSequenceIgnoresMatching) {
  const std::size_t n = 500;
  const Graph cycle = cycle_graph(n);
  const auto labels = compute_layers(cycle, sample_ages(cycle, 3));
  const auto a = build_auxiliary_h(labels, cycle_plus_matching(n, 1).matching);
  const auto b = build_auxiliary_h(labels, cycle_plus_matching(n, 2).matching);
  EXPECT_EQ(a.u1_degrees, b.u1_degrees);
  EXPECT_EQ(a.u2_count, b.u2_count);
  EXPECT_EQ(a.q_value(), b.q_value());
  EXPECT_NE(a.multigraph.edges(), b.multigraph.edges());
}

TEST(AuxiliaryH, RejectsBadMatching) {
  const Graph cycle = cycle_graph(6);
  const auto labels = compute_layers(cycle, sample_ages(cycle, 1));
  EXPECT_THROW(build_auxiliary_h(labels, std::vector<Edge>{{0, 1}, {2, 3}}), InvalidParameter);
  EXPECT_THROW(build_auxiliary_h(labels, std::vector<Edge>{{0, 1}, {1, 2}, {4, 5}}), InvalidParameter);
}

TEST(AuxiliaryH, MeanCounts) {
  const std::size_t n = 100000;
  const Graph cycle = cycle_graph(n);
  RunningStats u1, u2, deg1, deg2;
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto h = build_auxiliary_h(compute_layers(cycle, sample_ages(cycle, 70 + t)),
                                     cycle_plus_matching(n, 170 + t).matching);
    u1.add(static_cast<double>(h.u1_degrees.size()) / n);
    u2.add(static_cast<double>(h.u2_count) / n);
    deg1.add(static_cast<double>(std::count(h.u1_degrees.begin(), h.u1_degrees.end(), 1u)) / n);
    deg2.add(static_cast<double>(std::count(h.u1_degrees.begin(), h.u1_degrees.end(), 2u)) / n);
  }
  EXPECT_NEAR(u1.mean(), 1.0 / 3.0, 3 * u1.sem());
  EXPECT_NEAR(u2.mean(), 1.0 / 3.0, 3 * u2.sem());
  EXPECT_NEAR(deg1.mean(), 2.0 / 15.0, 3 * deg1.sem());
  EXPECT_NEAR(deg2.mean(), 1.0 / 9.0, 3 * deg2.sem());
}

TEST(GiantComponent, DeterministicCases) {
  const Graph c = cycle_graph(500);
  EXPECT_EQ(giant_component_trial(c, MaskSource::tk(3), 0.5, 1).largest_fraction, 1.0);
  EXPECT_EQ(giant_component_trial(c, MaskSource::percolation(0.0), 0.5, 1).largest_fraction, 0.0);
  EXPECT_THROW(giant_component_trial(c, MaskSource::tk(3), 0.0, 1), InvalidParameter);
  EXPECT_THROW(giant_component_trial(c, MaskSource::tk(3), 1.0, 1), InvalidParameter);
}

TEST(GiantComponent, T3OnCycleMatching) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Graph g = cycle_plus_matching(10000, 1000 + t).graph;
    EXPECT_TRUE(giant_component_trial(g, MaskSource::tk(3), 0.01, 2000 + t).passed);
  }
}

TEST(GiantComponent, SubdividedT3Survival) {
  std::uint64_t seed = 0;
  while (cycle_plus_matching(400, seed).graph.is_multigraph()) ++seed;
  const Graph base = cycle_plus_matching(400, seed).graph;
  // Original vertices share no neighbors after subdivision, so their
  // survival events are independent and the pooled count is binomial.
  const auto sub = subdivide_edges(base);
  const std::size_t n0 = sub.original_vertex_count;
  std::uint64_t kept = 0, total = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto mask = sample_mask(sub.graph, MaskSource::tk(3), t);
    for (Vertex v = 0; v < sub.graph.vertex_count(); ++v) {
      if (v >= n0) {
        ASSERT_TRUE(mask[v]) << "degree-2 vertex dropped";
      } else {
        kept += mask[v] ? 1 : 0;
        ++total;
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(kept) / total, 0.75, 3 * binomial_sigma(0.75, total));
}

// Treewidth straight from its elimination-order characterization: the
// minimum, over all orders, of the largest neighborhood at elimination time.
int brute_force_treewidth(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n == 0) return 0;
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), Vertex{0});
  int best = static_cast<int>(n);
  do {
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const Edge& e : g.edges())
      if (e.u != e.v) adj[e.u][e.v] = adj[e.v][e.u] = true;
    std::vector<bool> gone(n, false);
    int width = 0;
    for (Vertex v : order) {
      std::vector<Vertex> nb;
      for (Vertex u = 0; u < n; ++u)
        if (!gone[u] && adj[v][u]) nb.push_back(u);
      width = std::max(width, static_cast<int>(nb.size()));
      for (Vertex a : nb)
        for (Vertex b : nb)
          if (a != b) adj[a][b] = true;
      gone[v] = true;
    }
    best = std::min(best, width);
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

TEST(Treewidth, KnownValues) {
  EXPECT_EQ(exact_treewidth(d_ary_tree(2, 2)), 1);
  EXPECT_EQ(exact_treewidth(path_graph(12)), 1);
  EXPECT_EQ(exact_treewidth(cycle_graph(8)), 2);
  EXPECT_EQ(exact_treewidth(complete_graph(4)), 3);
  EXPECT_EQ(exact_treewidth(grid_box(1)), 3);
  EXPECT_EQ(exact_treewidth(complete_graph(12)), 11);
  EXPECT_EQ(exact_treewidth(Graph::from_edges(5, std::vector<Edge>{})), 0);
}

TEST(Treewidth, MatchesEliminationOrderOracle) {
  Engine rng = make_engine(12);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 2 + uniform_below(rng, 6);
    std::vector<Edge> edges;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v)
        if (bernoulli(rng, 0.5)) edges.push_back({u, v});
    const Graph g = Graph::from_edges(n, edges);
    ASSERT_EQ(exact_treewidth(g), brute_force_treewidth(g)) << "rep " << rep;
  }
}

TEST(Treewidth, SizeLimit) { EXPECT_THROW(exact_treewidth(path_graph(13)), SizeError); }

TEST(Treewidth, SeparatorBoundOnRandomGraphs) {
  Engine rng = make_engine(13);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 8 + uniform_below(rng, 5);
    const double density = 0.15 + 0.6 * uniform01(rng);
    std::vector<Edge> edges;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v)
        if (bernoulli(rng, density)) edges.push_back({u, v});
    const Graph g = Graph::from_edges(n, edges);
    const int w = exact_treewidth(g);
    ASSERT_TRUE(min_balanced_separator(g, static_cast<std::size_t>(w) + 1).has_value()) << "rep " << rep;
  }
}

TEST(TwoStage, RetentionFrequencies) {
  const double p = 0.6, q = 0.8;
  const std::uint64_t trials = 100000;
  const auto c = two_stage_retention(10, p, q, trials, 21);
  EXPECT_NEAR(static_cast<double>(c.vertex_hits) / trials, p, 4 * binomial_sigma(p, trials));
  EXPECT_NEAR(static_cast<double>(c.pair_hits) / trials, p * p, 4 * binomial_sigma(p * p, trials));
  EXPECT_NEAR(static_cast<double>(c.pooled_hits) / (10.0 * trials), p, 4 * binomial_sigma(p, 10 * trials));
  EXPECT_THROW(two_stage_retention(10, 0.8, 0.6, 1, 1), InvalidParameter);
  EXPECT_THROW(two_stage_retention(10, 0.5, 0.6, 1, 1, 3, 3), InvalidParameter);
}

TEST(TwoStage, FullStageQIsTheGraph) {
  const Graph g = cycle_plus_matching(10, 3).graph;
  const auto r = two_stage_treewidth_evidence(g, 0.5, 1.0, 20, 4);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.stage_q_fraction, 1.0);
    ASSERT_TRUE(row.stage_q_treewidth.has_value());
    EXPECT_EQ(*row.stage_q_treewidth, exact_treewidth(g));
  }
  EXPECT_THROW(two_stage_treewidth_evidence(g, 0.5, 0.5, 1, 1), InvalidParameter);
}

TEST(TwoStage, CubicGiantAtStageP) {
  int passed = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const Graph g = configuration_model({{3, 10000}}, static_cast<std::uint64_t>(t));
    const auto r = two_stage_treewidth_evidence(g, 0.6, 0.8, 1, 500 + t, 0.15);
    passed += r.rows[0].stage_p_passed ? 1 : 0;
  }
  EXPECT_GE(passed, 19);
}

TEST(TwoStage, CsvRows) {
  const auto r = two_stage_treewidth_evidence(cycle_graph(6), 0.5, 0.9, 2, 1);
  std::ostringstream out;
  write_csv(out, r);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  EXPECT_EQ(lines, 5u);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "trial,n,stage,largest_fraction,Q_value,passed");
}

}  // namespace
