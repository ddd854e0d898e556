#pragma once

// Molloy-Reed criterion, degree smoothing, the auxiliary multigraph H built
// from the cycle's T_2 components, giant-component trials, an exact
// small-graph treewidth oracle, and two-stage exposure evidence.

#include "layers/components.hpp"
#include "layers/errors.hpp"
#include "layers/graph.hpp"
#include "layers/layers_model.hpp"
#include "layers/random.hpp"
#include "layers/rational.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace layers {

/// Degree fractions lambda_i; must sum to exactly 1.
struct MolloyReedInput {
  std::map<std::uint32_t, Rational> fractions;

  void validate() const {
    Rational total = 0;
    for (const auto& [d, f] : fractions) {
      if (f < 0) throw InvalidParameter("molloy_reed: negative fraction");
      total += f;
    }
    if (total != 1)
      throw InvalidParameter("molloy_reed: fractions sum to " + to_string(total) + ", not 1");
  }

  static MolloyReedInput from_counts(const std::map<std::uint32_t, std::uint64_t>& counts) {
    std::uint64_t n = 0;
    for (const auto& [d, c] : counts) n += c;
    if (n == 0) throw InvalidParameter("molloy_reed: empty degree sequence");
    MolloyReedInput in;
    for (const auto& [d, c] : counts)
      if (c > 0) in.fractions[d] = Rational(BigInt(c), BigInt(n));
    return in;
  }

  static MolloyReedInput from_degree_sequence(const DegreeSequence& seq) {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (const auto& e : seq.entries) counts[e.degree] += e.count;
    return from_counts(counts);
  }
};

/// Exact Q = sum of lambda_i * i * (i - 2).
inline Rational molloy_reed_q(const MolloyReedInput& input) {
  input.validate();
  Rational q = 0;
  for (const auto& [d, f] : input.fractions) {
    const long long i = d;
    q += f * Rational(BigInt(i * (i - 2)));
  }
  return q;
}

struct SmoothedPair {
  std::uint32_t low = 0;
  std::uint32_t high = 0;
  /// Drop in the unnormalized sum d(d-2) + d'(d'-2).
  std::uint64_t q_decrease = 0;
};

/// (d, d') -> (d + 1, d' - 1) for d' >= d + 2; lowers the Q sum by 2(d' - d - 1).
inline SmoothedPair smooth_degree_pair(std::uint32_t d, std::uint32_t d_prime) {
  if (d_prime < d + 2)
    throw InvalidParameter("smooth_degree_pair: need d' >= d + 2, got (" + std::to_string(d) +
                           ", " + std::to_string(d_prime) + ")");
  return {d + 1, d_prime - 1, 2ULL * (d_prime - d - 1)};
}

/// Applies smooth_degree_pair to the extreme pair until all degrees are
/// within 1 of each other. Vertex count and degree sum are preserved.
inline std::vector<std::uint32_t> smooth_degree_sequence(std::vector<std::uint32_t> degrees) {
  if (degrees.empty()) return degrees;
  for (;;) {
    auto [lo, hi] = std::minmax_element(degrees.begin(), degrees.end());
    if (*hi < *lo + 2) break;
    const auto s = smooth_degree_pair(*lo, *hi);
    *lo = s.low;
    *hi = s.high;
  }
  std::sort(degrees.begin(), degrees.end());
  return degrees;
}

/// Degree histogram of the subgraph induced on `mask` (loops count 2).
inline std::map<std::uint32_t, std::uint64_t> induced_degree_counts(const Graph& g,
                                                                   const VertexMask& mask) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    if (!mask[v]) continue;
    std::uint32_t d = 0;
    for (Vertex u : g.neighbors(v)) d += mask[u] ? 1U : 0U;
    ++counts[d];
  }
  return counts;
}

// --- the auxiliary multigraph H ---

struct AuxiliaryH {
  /// One entry per T_2 component of the bare cycle; degree = component size.
  std::vector<std::size_t> u1_degrees;
  /// Cycle vertices outside T_2, each of degree 1.
  std::size_t u2_count = 0;
  /// H-vertex of every cycle vertex: U_1 ids first, then U_2.
  std::vector<Vertex> h_vertex_of;
  /// H realized by projecting the matching edges.
  Graph multigraph;
  std::size_t max_degree = 0;
  /// max_degree <= ceil(log2 n): the O(log n) bound the criterion relies on.
  bool within_degree_guard = false;

  std::size_t vertex_count() const { return u1_degrees.size() + u2_count; }

  MolloyReedInput degree_fractions() const {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (std::size_t d : u1_degrees) ++counts[static_cast<std::uint32_t>(d)];
    if (u2_count > 0) counts[1] += u2_count;
    return MolloyReedInput::from_counts(counts);
  }
  Rational q_value() const { return molloy_reed_q(degree_fractions()); }
};

inline void check_perfect_matching(std::size_t n, std::span<const Edge> matching) {
  if (matching.size() * 2 != n) throw InvalidParameter("matching: wrong number of edges");
  std::vector<std::uint8_t> hit(n, 0);
  for (const Edge& e : matching) {
    if (e.u >= n || e.v >= n || e.u == e.v || hit[e.u] || hit[e.v])
      throw InvalidParameter("matching: not a perfect matching");
    hit[e.u] = hit[e.v] = 1;
  }
}

/// `cycle_labels` must come from compute_layers on the bare n-cycle.
inline AuxiliaryH build_auxiliary_h(const LayerLabeling& cycle_labels,
                                    std::span<const Edge> matching) {
  const std::size_t n = cycle_labels.size();
  check_perfect_matching(n, matching);
  const Graph cycle = cycle_graph(n);
  const VertexMask v2 = layers_up_to(cycle_labels, 2);
  const ComponentSummary comps = connected_components(cycle, v2);

  AuxiliaryH h;
  h.u1_degrees = comps.sizes;
  h.h_vertex_of.resize(n);
  Vertex next_u2 = static_cast<Vertex>(comps.count);
  for (Vertex v = 0; v < n; ++v) {
    if (v2[v]) h.h_vertex_of[v] = static_cast<Vertex>(comps.component_id[v]);
    else {
      h.h_vertex_of[v] = next_u2++;
      ++h.u2_count;
    }
  }
  std::vector<Edge> edges;
  edges.reserve(matching.size());
  for (const Edge& e : matching) edges.push_back({h.h_vertex_of[e.u], h.h_vertex_of[e.v]});
  h.multigraph = Graph::from_edges(h.vertex_count(), edges);
  h.max_degree = h.multigraph.max_degree();
  const auto guard = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
  h.within_degree_guard = h.max_degree <= guard;
  return h;
}

// --- giant components ---

struct MaskSource {
  enum class Kind { tk, percolation } kind = Kind::tk;
  std::uint32_t k = 3;
  double p = 1.0;

  static MaskSource tk(std::uint32_t k) { return {Kind::tk, k, 1.0}; }
  static MaskSource percolation(double p) { return {Kind::percolation, 0, p}; }
};

struct GiantResult {
  double largest_fraction = 0.0;
  std::size_t largest = 0;
  bool passed = false;
};

inline VertexMask sample_mask(const Graph& g, const MaskSource& source, std::uint64_t seed) {
  if (source.kind == MaskSource::Kind::tk)
    return layers_up_to(compute_layers(g, sample_ages(g, seed)), source.k);
  return site_percolation(g, source.p, seed);
}

/// Samples the mask and measures its largest component as a fraction of |V|.
inline GiantResult giant_component_trial(const Graph& g, const MaskSource& source, double delta,
                                         std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("giant_component_trial: delta not in (0, 1)");
  const VertexMask mask = sample_mask(g, source, seed);
  GiantResult out;
  out.largest = connected_components(g, mask).largest;
  out.largest_fraction = g.vertex_count() == 0
                             ? 0.0
                             : static_cast<double>(out.largest) / static_cast<double>(g.vertex_count());
  out.passed = out.largest_fraction >= delta;
  return out;
}

// --- exact treewidth ---

inline constexpr std::size_t kTreewidthOracleLimit = 12;

namespace detail {
inline std::vector<std::uint32_t> adjacency_bits(const Graph& g) {
  std::vector<std::uint32_t> adj(g.vertex_count(), 0);
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    for (Vertex u : g.neighbors(v))
      if (u != v) adj[v] |= 1U << u;
  return adj;
}

inline std::uint32_t neighborhood(const std::vector<std::uint32_t>& adj, std::uint32_t set) {
  std::uint32_t out = 0;
  for (std::uint32_t s = set; s != 0; s &= s - 1) out |= adj[static_cast<std::size_t>(std::countr_zero(s))];
  return out;
}

/// Component sizes of the subgraph induced on `alive`.
inline std::uint32_t largest_component_bits(const std::vector<std::uint32_t>& adj, std::uint32_t alive) {
  std::uint32_t best = 0;
  while (alive != 0) {
    std::uint32_t comp = alive & (~alive + 1);
    for (;;) {
      const std::uint32_t grown = comp | (neighborhood(adj, comp) & alive);
      if (grown == comp) break;
      comp = grown;
    }
    best = std::max<std::uint32_t>(best, static_cast<std::uint32_t>(std::popcount(comp)));
    alive &= ~comp;
  }
  return best;
}
}  // namespace detail

/// Treewidth by dynamic programming over elimination prefixes:
/// TW(S) = min over v in S of max(TW(S - v), |Q(S - v, v)|), where Q(S, v)
/// is the set outside S + v reachable from v through S. Loops and edge
/// multiplicity are ignored. The edgeless graph has width 0.
inline int exact_treewidth(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n > kTreewidthOracleLimit)
    throw SizeError("exact_treewidth: limited to " + std::to_string(kTreewidthOracleLimit) + " vertices");
  if (n == 0) return 0;
  const auto adj = detail::adjacency_bits(g);
  const std::uint32_t full = (1U << n) - 1;
  std::vector<std::int8_t> tw(std::size_t{1} << n, 0);
  tw[0] = -1;
  for (std::uint32_t s = 1; s <= full; ++s) {
    int best = 127;
    for (std::uint32_t rest = s; rest != 0; rest &= rest - 1) {
      const auto v = static_cast<std::uint32_t>(std::countr_zero(rest));
      const std::uint32_t prior = s & ~(1U << v);
      int width = tw[prior];
      if (width >= best) continue;
      std::uint32_t comp = 1U << v;
      for (;;) {
        const std::uint32_t grown = comp | (detail::neighborhood(adj, comp) & prior);
        if (grown == comp) break;
        comp = grown;
      }
      const std::uint32_t q = detail::neighborhood(adj, comp) & ~prior & ~(1U << v);
      width = std::max(width, std::popcount(q));
      best = std::min(best, width);
    }
    tw[s] = static_cast<std::int8_t>(best);
  }
  return tw[full];
}

/// Smallest S such that every component of G - S has at most 2|V|/3
/// vertices, searching sizes up to `max_size` (default: all). Returns
/// nullopt when none exists within the limit.
inline std::optional<std::uint32_t> min_balanced_separator(const Graph& g,
                                                           std::size_t max_size = 64) {
  const std::size_t n = g.vertex_count();
  if (n > 20) throw SizeError("min_balanced_separator: exhaustive search limited to 20 vertices");
  const auto adj = detail::adjacency_bits(g);
  const std::uint32_t full = n == 0 ? 0 : (n == 32 ? ~0U : (1U << n) - 1);
  const std::size_t limit = (2 * n) / 3;
  for (std::size_t size = 0; size <= std::min(max_size, n); ++size) {
    // Gosper's hack over all size-subsets.
    if (size == 0) {
      if (detail::largest_component_bits(adj, full) <= limit) return 0U;
      continue;
    }
    std::uint32_t s = (1U << size) - 1;
    while (s <= full) {
      if (detail::largest_component_bits(adj, full & ~s) <= limit)
        return static_cast<std::uint32_t>(size);
      const std::uint32_t c = s & (~s + 1);
      const std::uint32_t r = s + c;
      if (r == 0 || r > full) break;
      s = (((r ^ s) >> 2) / c) | r;
    }
  }
  return std::nullopt;
}

// --- two-stage exposure ---

struct TwoStageRow {
  std::uint64_t trial = 0;
  std::size_t n = 0;
  double stage_q_fraction = 0.0;
  double stage_p_fraction = 0.0;
  std::size_t stage_q_size = 0;
  std::size_t stage_p_size = 0;
  double stage_q_q_value = 0.0;
  double stage_p_q_value = 0.0;
  bool stage_q_passed = false;
  bool stage_p_passed = false;
  std::optional<int> stage_q_treewidth;
};

struct TwoStageReport {
  double p = 0.0;
  double q = 0.0;
  double delta = 0.0;
  std::vector<TwoStageRow> rows;

  double stage_p_pass_rate() const {
    if (rows.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& r : rows) c += r.stage_p_passed ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(rows.size());
  }
};

struct TwoStageMasks {
  VertexMask stage_q;
  VertexMask stage_p;
};

/// G_q, then G_p inside it by keeping survivors with probability p / q.
inline TwoStageMasks two_stage_masks(std::size_t n, double p, double q, Engine& rng) {
  TwoStageMasks m;
  m.stage_q = thin_mask(VertexMask(n, true), q, rng);
  m.stage_p = thin_mask(m.stage_q, p / q, rng);
  return m;
}

struct RetentionCounts {
  std::uint64_t trials = 0;
  std::size_t n = 0;
  std::uint64_t vertex_hits = 0;  // vertex a survives both stages
  std::uint64_t pair_hits = 0;    // a and b both survive
  std::uint64_t pooled_hits = 0;  // survivors summed over all vertices
};

/// Survival counts of G_q then G_{p/q}(G_q), each trial on its own stream.
inline RetentionCounts two_stage_retention(std::size_t n, double p, double q, std::uint64_t trials,
                                           std::uint64_t seed, Vertex a = 0, Vertex b = 1) {
  if (!(p > 0.0 && p < q && q <= 1.0)) throw InvalidParameter("two_stage: need 0 < p < q <= 1");
  if (a >= n || b >= n || a == b) throw InvalidParameter("two_stage_retention: bad vertex pair");
  RetentionCounts c;
  c.trials = trials;
  c.n = n;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Engine rng = make_engine(seed, {0x7274ULL, t});
    const auto masks = two_stage_masks(n, p, q, rng);
    c.vertex_hits += masks.stage_p[a] ? 1 : 0;
    c.pair_hits += masks.stage_p[a] && masks.stage_p[b] ? 1 : 0;
    c.pooled_hits += masks.stage_p.count();
  }
  return c;
}

inline double q_value_or_nan(const Graph& g, const VertexMask& mask) {
  const auto counts = induced_degree_counts(g, mask);
  if (counts.empty()) return std::nan("");
  return to_double(molloy_reed_q(MolloyReedInput::from_counts(counts)));
}

inline TwoStageReport two_stage_treewidth_evidence(const Graph& g, double p, double q,
                                                   std::uint64_t trials, std::uint64_t seed,
                                                   double delta = 0.01) {
  if (!(p > 0.0 && p < q && q <= 1.0))
    throw InvalidParameter("two_stage: need 0 < p < q <= 1");
  TwoStageReport report{p, q, delta, {}};
  const std::size_t n = g.vertex_count();
  for (std::uint64_t t = 0; t < trials; ++t) {
    Engine rng = make_engine(seed, {0x7473ULL, t});
    const auto masks = two_stage_masks(n, p, q, rng);
    TwoStageRow row;
    row.trial = t;
    row.n = n;
    row.stage_q_size = connected_components(g, masks.stage_q).largest;
    row.stage_p_size = connected_components(g, masks.stage_p).largest;
    const double denom = n == 0 ? 1.0 : static_cast<double>(n);
    row.stage_q_fraction = static_cast<double>(row.stage_q_size) / denom;
    row.stage_p_fraction = static_cast<double>(row.stage_p_size) / denom;
    row.stage_q_passed = row.stage_q_fraction >= delta;
    row.stage_p_passed = row.stage_p_fraction >= delta;
    row.stage_q_q_value = q_value_or_nan(g, masks.stage_q);
    row.stage_p_q_value = q_value_or_nan(g, masks.stage_p);
    if (n <= kTreewidthOracleLimit)
      row.stage_q_treewidth = exact_treewidth(induced_subgraph(g, masks.stage_q).graph);
    report.rows.push_back(row);
  }
  return report;
}

/// Rows: trial,n,stage,largest_fraction,Q_value,passed
inline void write_csv(std::ostream& out, const TwoStageReport& r, bool header = true) {
  if (header) out << "trial,n,stage,largest_fraction,Q_value,passed\n";
  for (const auto& row : r.rows) {
    out << row.trial << ',' << row.n << ",q," << format_double(row.stage_q_fraction) << ','
        << format_double(row.stage_q_q_value) << ',' << (row.stage_q_passed ? 1 : 0) << '\n';
    out << row.trial << ',' << row.n << ",p," << format_double(row.stage_p_fraction) << ','
        << format_double(row.stage_p_q_value) << ',' << (row.stage_p_passed ? 1 : 0) << '\n';
  }
}

}  // namespace layers
