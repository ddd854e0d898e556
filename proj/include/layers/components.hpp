#pragma once

// Connected components under graph / grid4 / star8 adjacency, monotone
// components, cycle segment statistics, and binary-tree survival.

#include "layers/errors.hpp"
#include "layers/generators.hpp"
#include "layers/graph.hpp"
#include "layers/layers_model.hpp"
#include "layers/random.hpp"

#include <algorithm>
#include <bit>
#include <concepts>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>
#include <utility>
#include <vector>

namespace layers {

enum class Adjacency { graph, grid4, star8 };

struct ComponentSummary {
  /// -1 for vertices outside the mask; ids ordered by smallest member index.
  std::vector<std::int64_t> component_id;
  std::vector<std::size_t> sizes;
  std::size_t largest = 0;
  std::size_t count = 0;

  friend bool operator==(const ComponentSummary&, const ComponentSummary&) = default;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

namespace detail {

inline ComponentSummary summarize_roots(const VertexMask& mask, auto&& root_of) {
  ComponentSummary out;
  out.component_id.assign(mask.size(), -1);
  std::vector<std::int64_t> id_of_root(mask.size(), -1);
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (!mask[v]) continue;
    const std::size_t r = root_of(v);
    if (id_of_root[r] < 0) {
      id_of_root[r] = static_cast<std::int64_t>(out.sizes.size());
      out.sizes.push_back(0);
    }
    out.component_id[v] = id_of_root[r];
    ++out.sizes[static_cast<std::size_t>(id_of_root[r])];
  }
  out.count = out.sizes.size();
  out.largest = out.sizes.empty() ? 0 : *std::max_element(out.sizes.begin(), out.sizes.end());
  return out;
}

template <class NeighborFn>
ComponentSummary bfs_components(const VertexMask& mask, NeighborFn&& for_each_neighbor) {
  ComponentSummary out;
  out.component_id.assign(mask.size(), -1);
  std::vector<std::size_t> queue;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s] || out.component_id[s] >= 0) continue;
    const auto id = static_cast<std::int64_t>(out.sizes.size());
    queue.assign(1, s);
    out.component_id[s] = id;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      for_each_neighbor(queue[head], [&](std::size_t w) {
        if (mask[w] && out.component_id[w] < 0) {
          out.component_id[w] = id;
          queue.push_back(w);
        }
      });
    }
    out.sizes.push_back(queue.size());
  }
  out.count = out.sizes.size();
  out.largest = out.sizes.empty() ? 0 : *std::max_element(out.sizes.begin(), out.sizes.end());
  return out;
}

}  // namespace detail

/// Calls fn(w) for each in-box neighbor of cell v under grid4 or star8.
template <class Fn>
void for_each_grid_neighbor(const GridGeometry& geom, std::size_t v, Adjacency mode, Fn&& fn) {
  const Coord c = geom.coord(static_cast<Vertex>(v));
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (mode == Adjacency::grid4 && dx != 0 && dy != 0) continue;
      const Coord w{c.x + dx, c.y + dy};
      if (geom.contains(w)) fn(static_cast<std::size_t>(geom.index(w)));
    }
}

/// Components of the subgraph induced on `mask`. Graph mode uses union-find;
/// grid modes run BFS over coordinates and need a grid-carrying graph.
inline ComponentSummary connected_components(const Graph& g, const VertexMask& mask,
                                             Adjacency mode = Adjacency::graph) {
  if (mask.size() != g.vertex_count()) throw InvalidParameter("connected_components: mask length");
  if (mode == Adjacency::graph) {
    UnionFind uf(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
      if (!mask[v]) continue;
      for (Vertex u : g.neighbors(v))
        if (u > v && mask[u]) uf.unite(u, v);
    }
    return detail::summarize_roots(mask, [&](std::size_t v) { return uf.find(v); });
  }
  if (!g.grid()) throw InvalidMode("grid adjacency requested on a graph without grid coordinates");
  const GridGeometry geom = *g.grid();
  return detail::bfs_components(mask, [&](std::size_t v, auto&& visit) {
    for_each_grid_neighbor(geom, v, mode, visit);
  });
}

/// Grid components straight from a geometry, without building a Graph.
inline ComponentSummary grid_components(const GridGeometry& geom, const VertexMask& mask,
                                        Adjacency mode) {
  if (mode == Adjacency::graph) throw InvalidMode("grid_components needs grid4 or star8");
  if (mask.size() != geom.cell_count()) throw InvalidParameter("grid_components: mask length");
  return detail::bfs_components(mask, [&](std::size_t v, auto&& visit) {
    for_each_grid_neighbor(geom, v, mode, visit);
  });
}

// --- monotone components ---

template <class A>
concept AgeSource = requires(A a, Vertex v) {
  { a(v) } -> std::convertible_to<double>;
};

/// Vertices reachable from v along strictly age-decreasing paths, v first.
/// `age` is queried once per vertex reached or inspected, so a lazily
/// sampled source sees exactly the ages the exploration depends on.
template <AgeSource A>
std::vector<Vertex> monotone_component(const Graph& g, A&& age, Vertex v,
                                       std::vector<std::uint8_t>* scratch = nullptr) {
  std::vector<std::uint8_t> local;
  std::vector<std::uint8_t>& seen = scratch ? *scratch : local;
  if (seen.size() < g.vertex_count()) seen.assign(g.vertex_count(), 0);
  std::vector<Vertex> out{v};
  std::vector<double> out_age{static_cast<double>(age(v))};
  seen[v] = 1;
  // Vertex w joins through the first member found older than it. Ages are
  // fixed, so the reachable set does not depend on visit order.
  for (std::size_t head = 0; head < out.size(); ++head) {
    const Vertex u = out[head];
    const double xu = out_age[head];
    for (Vertex w : g.neighbors(u)) {
      if (seen[w]) continue;
      const double xw = age(w);
      if (xw < xu) {
        seen[w] = 1;
        out.push_back(w);
        out_age.push_back(xw);
      }
    }
  }
  for (Vertex w : out) seen[w] = 0;
  return out;
}

inline std::vector<Vertex> monotone_component(const Graph& g, const AgeAssignment& ages, Vertex v) {
  return monotone_component(g, [&](Vertex u) { return ages[u]; }, v);
}

/// Ages drawn on first request and memoized; reset() forgets only the
/// vertices touched since the last reset.
class LazyAges {
 public:
  explicit LazyAges(std::size_t n) : ages_(n, -1.0) {}

  void reset(Engine& rng) {
    for (Vertex v : touched_) ages_[v] = -1.0;
    touched_.clear();
    rng_ = &rng;
  }
  void fix(Vertex v, double age) {
    if (ages_[v] < 0.0) touched_.push_back(v);
    ages_[v] = age;
  }
  double operator()(Vertex v) {
    if (ages_[v] < 0.0) {
      ages_[v] = uniform01(*rng_);
      touched_.push_back(v);
    }
    return ages_[v];
  }
  std::size_t touched() const noexcept { return touched_.size(); }
  std::size_t size() const noexcept { return ages_.size(); }

 private:
  std::vector<double> ages_;
  std::vector<Vertex> touched_;
  Engine* rng_ = nullptr;
};

/// sum_{i=0}^{depth} x^i / i!: the mean monotone component of a root with
/// age a in the d-ary tree of that depth, at x = a d.
inline double truncated_exponential(double x, std::size_t depth) {
  double term = 1.0;
  double total = 1.0;
  for (std::size_t i = 1; i <= depth; ++i) {
    term *= x / static_cast<double>(i);
    total += term;
  }
  return total;
}

/// |C_mon(root)| for one draw: root age fixed, other ages lazily from rng.
inline std::size_t monotone_root_size(const Graph& tree, Vertex root, double root_age, Engine& rng,
                                      LazyAges& ages, std::vector<std::uint8_t>& scratch) {
  ages.reset(rng);
  ages.fix(root, root_age);
  return monotone_component(tree, ages, root, &scratch).size();
}

inline Engine monotone_sample_engine(std::uint64_t seed, std::uint64_t sample) {
  return make_engine(seed, {0x6d6f6eULL, sample});
}

/// |C_mon(root)| over `samples` independent draws, sample s on its own stream.
inline std::vector<std::size_t> monotone_root_sizes(const Graph& tree, Vertex root, double root_age,
                                                    std::uint64_t samples, std::uint64_t seed) {
  LazyAges ages(tree.vertex_count());
  std::vector<std::uint8_t> scratch(tree.vertex_count(), 0);
  std::vector<std::size_t> out;
  out.reserve(samples);
  for (std::uint64_t s = 0; s < samples; ++s) {
    Engine rng = monotone_sample_engine(seed, s);
    out.push_back(monotone_root_size(tree, root, root_age, rng, ages, scratch));
  }
  return out;
}

enum class MonotoneDirection { decreasing, increasing };

/// Largest monotone component over all start vertices. A maximum is
/// attained at a vertex with no neighbor ahead of it in the path order
/// (older for decreasing paths, younger for increasing ones), so only
/// those are explored.
inline std::size_t max_monotone_component(const Graph& g, const AgeAssignment& ages, MonotoneDirection dir) {
  // Negation keeps the order exact, unlike 1 - x.
  const double sign = dir == MonotoneDirection::decreasing ? 1.0 : -1.0;
  auto age = [&](Vertex u) { return sign * ages[u]; };
  std::vector<std::uint8_t> scratch(g.vertex_count(), 0);
  std::size_t best = 0;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    bool start = true;
    for (Vertex u : g.neighbors(v))
      if (u != v && age(u) > age(v)) {
        start = false;
        break;
      }
    if (start) best = std::max(best, monotone_component(g, age, v, &scratch).size());
  }
  return best;
}

struct DominationPair {
  std::size_t largest_t2_component = 0;
  /// Paths oriented like the layer count: each step goes to a larger age.
  std::size_t largest_monotone_component = 0;
  /// Strictly age-decreasing paths, for reference; no domination holds here.
  std::size_t largest_decreasing_component = 0;
};

/// (max |C_2(v)|, max |C_mon(v)|). A T_2 vertex has at most one younger
/// neighbor, so each T_2 component is reached from its youngest vertex
/// along age-increasing paths; those are the paths the domination uses.
inline DominationPair max_component_vs_max_monotone(const Graph& g, const AgeAssignment& ages) {
  const LayerLabeling labels = compute_layers(g, ages);
  DominationPair out;
  out.largest_t2_component = connected_components(g, layers_up_to(labels, 2)).largest;
  out.largest_monotone_component = max_monotone_component(g, ages, MonotoneDirection::increasing);
  out.largest_decreasing_component = max_monotone_component(g, ages, MonotoneDirection::decreasing);
  return out;
}

// --- cycle segments ---

struct SegmentStats {
  std::size_t n = 0;
  std::size_t masked = 0;
  /// Maximal in-mask runs along the cycle, by length.
  std::map<std::size_t, std::size_t> histogram;
  /// Whole cycle in the mask: one run of length n, no boundary.
  bool degenerate = false;

  std::size_t run_count() const {
    std::size_t c = 0;
    for (const auto& [len, cnt] : histogram) c += cnt;
    return c;
  }
  std::size_t runs_of(std::size_t len) const {
    auto it = histogram.find(len);
    return it == histogram.end() ? 0 : it->second;
  }
  /// Empirical p_k: runs of length k per cycle vertex.
  double p_hat(std::size_t len) const {
    return n == 0 ? 0.0 : static_cast<double>(runs_of(len)) / static_cast<double>(n);
  }
  std::vector<double> p_hat_vector(std::size_t k_max) const {
    std::vector<double> out;
    for (std::size_t k = 1; k <= k_max; ++k) out.push_back(p_hat(k));
    return out;
  }
};

/// True iff vertex i is adjacent exactly to i-1 and i+1 (mod n), once each.
inline bool is_labeled_cycle(const Graph& g) {
  const std::size_t n = g.vertex_count();
  if (n < 3 || g.is_multigraph()) return false;
  for (Vertex i = 0; i < n; ++i) {
    if (g.degree(i) != 2) return false;
    if (!g.adjacent(i, static_cast<Vertex>((i + 1) % n))) return false;
  }
  return true;
}

/// Runs of T_2 (layer <= 2) along the labeled cycle.
inline SegmentStats cycle_segment_stats(const Graph& cycle, const LayerLabeling& labels) {
  if (!is_labeled_cycle(cycle)) throw InvalidMode("cycle_segment_stats needs the labeled n-cycle");
  if (labels.size() != cycle.vertex_count()) throw InvalidParameter("cycle_segment_stats: label length");
  const std::size_t n = cycle.vertex_count();
  SegmentStats out;
  out.n = n;
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] <= 2) ++out.masked;
    else if (start == n) start = i;
  }
  if (start == n) {
    out.degenerate = true;
    out.histogram[n] = 1;
    return out;
  }
  // Walk once around from the first outside vertex.
  std::size_t run = 0;
  for (std::size_t step = 1; step <= n; ++step) {
    const std::size_t i = (start + step) % n;
    if (labels[i] <= 2) {
      ++run;
    } else {
      if (run > 0) ++out.histogram[run];
      run = 0;
    }
  }
  return out;
}

// --- complete binary tree survival in T_2 ---

enum class SurvivalMode { exact, montecarlo };

struct SurvivalEstimate {
  std::uint64_t successes = 0;
  std::uint64_t total = 0;
  bool exact = false;
  double probability() const {
    return total == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(total);
  }
};

/// Probability that all of BIN_k survives in T_2. Exact mode enumerates
/// every ordering of the k - 1 vertices (k <= 8); Monte Carlo draws ages.
inline SurvivalEstimate binary_tree_survival(std::size_t k, SurvivalMode mode,
                                             std::uint64_t seed = 0, std::uint64_t trials = 0) {
  const Graph tree = complete_binary_tree(k);
  const std::size_t n = tree.vertex_count();
  auto all_survive = [&](const AgeAssignment& ages) {
    const auto labels = compute_layers(tree, ages);
    return std::all_of(labels.layer.begin(), labels.layer.end(),
                       [](std::uint32_t l) { return l <= 2; });
  };
  SurvivalEstimate out;
  if (mode == SurvivalMode::exact) {
    if (n > 9) throw SizeError("binary_tree_survival: exact mode limited to 9 vertices");
    std::vector<Vertex> perm(n);
    std::iota(perm.begin(), perm.end(), Vertex{0});
    out.exact = true;
    do {
      ++out.total;
      if (all_survive(permutation_to_ages(perm))) ++out.successes;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }
  if (trials == 0) throw InvalidParameter("binary_tree_survival: trials must be positive");
  for (std::uint64_t t = 0; t < trials; ++t) {
    ++out.total;
    if (all_survive(sample_ages(tree, derive_seed(seed, {t})))) ++out.successes;
  }
  return out;
}

// --- CSV ---

inline void write_csv(std::ostream& out, const SegmentStats& s) {
  out << "length,count\n";
  for (const auto& [len, cnt] : s.histogram) out << len << ',' << cnt << '\n';
}

inline void write_csv(std::ostream& out, const ComponentSummary& c) {
  out << "component_id,size\n";
  for (std::size_t i = 0; i < c.sizes.size(); ++i) out << i << ',' << c.sizes[i] << '\n';
}

}  // namespace layers
