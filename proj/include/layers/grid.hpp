#pragma once

// Finite-box Z^2 machinery: T_4 / L_5 configurations, parity sublattices,
// the up-neighbor coupling, crossings and their duality, surrounding
// cycles, annulus circuits, and the finite-box giant-cluster experiment.

#include "layers/components.hpp"
#include "layers/errors.hpp"
#include "layers/generators.hpp"
#include "layers/graph.hpp"
#include "layers/layers_model.hpp"
#include "layers/random.hpp"
#include "layers/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace layers {

inline bool is_even(Coord c) noexcept { return ((c.x + c.y) % 2 + 2) % 2 == 0; }

enum class GridSource { t4, l5, independent, custom };

/// Open/closed state of every cell of [-n, n]^2.
struct GridConfiguration {
  GridGeometry geom;
  VertexMask open;
  GridSource source = GridSource::custom;

  int half_width() const noexcept { return geom.half_width; }
  bool is_open(Coord c) const noexcept { return open[geom.index(c)]; }
  void set(Coord c, bool value) { open.set(geom.index(c), value); }

  static GridConfiguration filled(int half_width, bool value) {
    GridGeometry g{half_width};
    return {g, VertexMask(g.cell_count(), value), GridSource::custom};
  }
};

/// Layer labels on the box, computed from coordinates (box-induced degrees).
inline LayerLabeling grid_layer_labels(const GridGeometry& geom, const AgeAssignment& ages) {
  if (ages.size() != geom.cell_count()) throw InvalidParameter("grid_layer_labels: size mismatch");
  LayerLabeling out;
  out.layer.resize(geom.cell_count());
  const int n = geom.half_width;
  const int side = geom.side();
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      const Vertex v = geom.index({x, y});
      const double xv = ages[v];
      std::uint32_t younger = 0;
      auto look = [&](Vertex u) {
        if (ages[u] == xv) throw TieError(std::min(u, v), std::max(u, v));
        younger += ages[u] < xv ? 1U : 0U;
      };
      if (x > -n) look(v - 1);
      if (x < n) look(v + 1);
      if (y > -n) look(v - static_cast<Vertex>(side));
      if (y < n) look(v + static_cast<Vertex>(side));
      out.layer[v] = younger + 1;
    }
  return out;
}

/// Ages of the sub-box [-m, m]^2 taken from a sample on a larger box.
inline AgeAssignment restrict_ages(const GridGeometry& from, const AgeAssignment& ages, int m) {
  if (m > from.half_width || m < 1) throw InvalidParameter("restrict_ages: bad sub-box");
  const GridGeometry to{m};
  AgeAssignment out;
  out.ages.resize(to.cell_count());
  for (int y = -m; y <= m; ++y)
    for (int x = -m; x <= m; ++x) out.ages[to.index({x, y})] = ages[from.index({x, y})];
  return out;
}

struct GridLayersSample {
  AgeAssignment ages;
  LayerLabeling labels;
  GridConfiguration t4;  // open = layer <= 4
  GridConfiguration l5;  // open = layer == 5
  VertexMask interior;   // cells with all four neighbors in the box
};

inline GridLayersSample grid_layers_from_ages(int half_width, AgeAssignment ages) {
  const GridGeometry geom{half_width};
  GridLayersSample s;
  s.labels = grid_layer_labels(geom, ages);
  s.ages = std::move(ages);
  s.t4 = {geom, layers_up_to(s.labels, 4), GridSource::t4};
  s.l5 = {geom, layer_exactly(s.labels, 5), GridSource::l5};
  s.interior = VertexMask(geom.cell_count());
  for (Vertex v = 0; v < geom.cell_count(); ++v) s.interior.set(v, !geom.on_boundary(geom.coord(v)));
  return s;
}

/// Samples ages on the box graph and splits the cells into T_4 and L_5.
inline GridLayersSample grid_layers(const Graph& box, std::uint64_t seed) {
  if (!box.grid()) throw InvalidMode("grid_layers: graph carries no grid coordinates");
  if (box.grid()->half_width < 2) throw InvalidParameter("grid_layers: half_width must be >= 2");
  return grid_layers_from_ages(box.grid()->half_width, sample_ages(box, seed));
}

inline GridLayersSample grid_layers(int half_width, std::uint64_t seed) {
  if (half_width < 2) throw InvalidParameter("grid_layers: half_width must be >= 2");
  return grid_layers(grid_box(half_width), seed);
}

/// Independent site percolation on the box.
inline GridConfiguration grid_site_percolation(int half_width, double p, std::uint64_t seed) {
  check_probability(p, "grid_site_percolation");
  GridGeometry geom{half_width};
  Engine rng = make_engine(seed, {0x67726964ULL});
  GridConfiguration c{geom, VertexMask(geom.cell_count()), GridSource::independent};
  for (std::size_t v = 0; v < geom.cell_count(); ++v) c.open.set(v, bernoulli(rng, p));
  return c;
}

/// Smallest integer c with c^5 >= n.
inline int ceil_fifth_root(int n) {
  int c = 0;
  while (static_cast<long long>(c) * c * c * c * c < n) ++c;
  return c;
}

/// Half-width of the statistics window A_n = [-n + 4 ceil(n^(1/5)), n - 4 ceil(n^(1/5))]^2.
inline int interior_window(int n) { return n - 4 * ceil_fifth_root(n); }

// --- parity ---

struct ParitySplit {
  VertexMask even;
  VertexMask odd;
};

inline ParitySplit parity_split(const GridConfiguration& config) {
  const auto& geom = config.geom;
  ParitySplit s{VertexMask(geom.cell_count()), VertexMask(geom.cell_count())};
  for (Vertex v = 0; v < geom.cell_count(); ++v) {
    if (is_even(geom.coord(v))) s.even.set(v);
    else s.odd.set(v);
  }
  return s;
}

/// Every star8 component of the open cells lies in one parity class.
inline bool star_components_parity_pure(const GridConfiguration& config) {
  const auto comps = grid_components(config.geom, config.open, Adjacency::star8);
  std::vector<int> parity(comps.count, -1);
  for (Vertex v = 0; v < config.geom.cell_count(); ++v) {
    const auto id = comps.component_id[v];
    if (id < 0) continue;
    const int p = is_even(config.geom.coord(v)) ? 0 : 1;
    auto& slot = parity[static_cast<std::size_t>(id)];
    if (slot < 0) slot = p;
    else if (slot != p) return false;
  }
  return true;
}

/// No two grid4-adjacent cells are both open.
inline bool open_cells_independent(const GridConfiguration& config) {
  const auto& geom = config.geom;
  const int n = geom.half_width;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      if (!config.is_open({x, y})) continue;
      if (x < n && config.is_open({x + 1, y})) return false;
      if (y < n && config.is_open({x, y + 1})) return false;
    }
  return true;
}

/// phi(u, v) = (u + v, u - v) against the box: grid4 edges map to even
/// star edges, even star edges between images pull back to grid4 edges,
/// and the edge counts agree.
inline bool phi_isomorphism_check(int half_width) {
  if (half_width < 1) throw InvalidParameter("phi_isomorphism_check: half_width must be >= 1");
  const int n = half_width;
  auto phi = [](Coord c) { return Coord{c.x + c.y, c.x - c.y}; };
  auto phi_inv = [](Coord c) { return Coord{(c.x + c.y) / 2, (c.x - c.y) / 2}; };
  auto in_box = [n](Coord c) { return std::abs(c.x) <= n && std::abs(c.y) <= n; };
  auto star_adjacent = [](Coord a, Coord b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)) == 1;
  };

  std::size_t grid_edges = 0;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      const Coord a{x, y};
      if (!is_even(phi(a)) || phi_inv(phi(a)) != a) return false;
      for (Coord b : {Coord{x + 1, y}, Coord{x, y + 1}}) {
        if (!in_box(b)) continue;
        ++grid_edges;
        if (!star_adjacent(phi(a), phi(b))) return false;
      }
    }

  // Star edges among the image set, pulled back.
  std::size_t image_edges = 0;
  for (int y = -n; y <= n; ++y)
    for (int x = -n; x <= n; ++x) {
      const Coord a = phi({x, y});
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const Coord b{a.x + dx, a.y + dy};
          if (!is_even(b)) continue;
          const Coord pre = phi_inv(b);
          if (!in_box(pre)) continue;
          if (std::abs(pre.x - x) + std::abs(pre.y - y) != 1) return false;
          ++image_edges;
        }
    }
  return image_edges % 2 == 0 && image_edges / 2 == grid_edges;
}

// --- coupling with an independent fair-coin field ---

struct CouplingReport {
  std::vector<Coord> violations;  // v in L_5 with X_v < X_{v+(0,1)}
  std::size_t pairs = 0;          // cells whose up-neighbor is in the box
  std::size_t z_ones = 0;         // X_v > X_{v+(0,1)}
  std::size_t l5_members = 0;     // cells in L_5 among those pairs
  std::size_t even_pairs = 0;
  std::size_t even_z_ones = 0;
  std::size_t even_l5 = 0;
};

/// Z_v = [X_v > X_{v+(0,1)}]. Membership in L_5 forces Z_v = 1. The up
/// shift pairs even with odd cells and odd with even, so one pass covers both
/// parity classes.
inline CouplingReport coupling_domination_check(const AgeAssignment& ages, const GridConfiguration& l5) {
  const auto& geom = l5.geom;
  if (ages.size() != geom.cell_count()) throw InvalidParameter("coupling_domination_check: size mismatch");
  CouplingReport r;
  const int n = geom.half_width;
  for (int y = -n; y < n; ++y)
    for (int x = -n; x <= n; ++x) {
      const Coord v{x, y};
      const double xv = ages[geom.index(v)];
      const double xu = ages[geom.index({x, y + 1})];
      const bool z = xv > xu;
      const bool in_l5 = l5.is_open(v);
      ++r.pairs;
      r.z_ones += z ? 1 : 0;
      r.l5_members += in_l5 ? 1 : 0;
      if (is_even(v)) {
        ++r.even_pairs;
        r.even_z_ones += z ? 1 : 0;
        r.even_l5 += in_l5 ? 1 : 0;
      }
      if (in_l5 && xv < xu) r.violations.push_back(v);
    }
  return r;
}

// --- crossings ---

/// Cells {lo.x..hi.x} x {lo.y..hi.y}; sides L: x = lo.x, R: x = hi.x,
/// D: y = lo.y, U: y = hi.y.
struct CrossingRectangle {
  Coord lo;
  Coord hi;

  void validate() const {
    if (!(lo.x < hi.x && lo.y < hi.y))
      throw InvalidParameter("crossing rectangle must have lo < hi in both coordinates");
  }
  bool contains(Coord c) const noexcept {
    return c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y;
  }
  int width() const noexcept { return hi.x - lo.x + 1; }
  int height() const noexcept { return hi.y - lo.y + 1; }
  bool on_left(Coord c) const noexcept { return c.x == lo.x; }
  bool on_right(Coord c) const noexcept { return c.x == hi.x; }
  bool on_down(Coord c) const noexcept { return c.y == lo.y; }
  bool on_up(Coord c) const noexcept { return c.y == hi.y; }
};

enum class Direction { lr, du };
enum class Polarity { open, closed };

inline bool within_box(const GridGeometry& geom, const CrossingRectangle& rect) {
  return geom.contains(rect.lo) && geom.contains(rect.hi);
}

/// A path inside `rect` through cells of the given polarity from L to R
/// (or D to U), or nullopt. BFS, so the path is a shortest one.
inline std::optional<std::vector<Coord>> find_crossing(const GridConfiguration& config,
                                                       const CrossingRectangle& rect, Direction dir,
                                                       Adjacency adjacency, Polarity polarity) {
  rect.validate();
  if (adjacency == Adjacency::graph) throw InvalidMode("find_crossing needs grid4 or star8");
  if (!within_box(config.geom, rect)) throw InvalidParameter("find_crossing: rectangle leaves the box");
  const int w = rect.width();
  const int h = rect.height();
  auto local = [&](Coord c) { return static_cast<std::size_t>((c.y - rect.lo.y) * w + (c.x - rect.lo.x)); };
  auto at = [&](std::size_t i) {
    return Coord{rect.lo.x + static_cast<int>(i % static_cast<std::size_t>(w)),
                 rect.lo.y + static_cast<int>(i / static_cast<std::size_t>(w))};
  };
  const bool want_open = polarity == Polarity::open;
  auto usable = [&](Coord c) { return config.is_open(c) == want_open; };
  auto is_start = [&](Coord c) { return dir == Direction::lr ? rect.on_left(c) : rect.on_down(c); };
  auto is_goal = [&](Coord c) { return dir == Direction::lr ? rect.on_right(c) : rect.on_up(c); };

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(static_cast<std::size_t>(w * h), none);
  std::vector<std::uint8_t> seen(parent.size(), 0);
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < parent.size(); ++i) {
    const Coord c = at(i);
    if (is_start(c) && usable(c)) {
      seen[i] = 1;
      queue.push_back(i);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t i = queue[head];
    const Coord c = at(i);
    if (is_goal(c)) {
      std::vector<Coord> path;
      for (std::size_t j = i; j != none; j = parent[j]) path.push_back(at(j));
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if ((dx == 0 && dy == 0) || (adjacency == Adjacency::grid4 && dx != 0 && dy != 0)) continue;
        const Coord d{c.x + dx, c.y + dy};
        if (!rect.contains(d) || !usable(d)) continue;
        const std::size_t j = local(d);
        if (seen[j]) continue;
        seen[j] = 1;
        parent[j] = i;
        queue.push_back(j);
      }
  }
  return std::nullopt;
}

/// Re-checks a returned crossing: legal steps, correct sides, containment, polarity.
inline bool verify_crossing(const GridConfiguration& config, const CrossingRectangle& rect,
                            Direction dir, Adjacency adjacency, Polarity polarity,
                            const std::vector<Coord>& path) {
  if (path.empty()) return false;
  const bool want_open = polarity == Polarity::open;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const Coord c = path[i];
    if (!rect.contains(c) || config.is_open(c) != want_open) return false;
    if (i > 0) {
      const int dx = std::abs(c.x - path[i - 1].x);
      const int dy = std::abs(c.y - path[i - 1].y);
      const bool ok = adjacency == Adjacency::grid4 ? dx + dy == 1 : std::max(dx, dy) == 1;
      if (!ok) return false;
    }
  }
  if (dir == Direction::lr) return rect.on_left(path.front()) && rect.on_right(path.back());
  return rect.on_down(path.front()) && rect.on_up(path.back());
}

inline bool has_crossing(const GridConfiguration& config, const CrossingRectangle& rect, Direction dir,
                         Adjacency adjacency, Polarity polarity) {
  return find_crossing(config, rect, dir, adjacency, polarity).has_value();
}

struct DualityResult {
  bool open_lr = false;         // open grid4 LR crossing
  bool closed_star_du = false;  // closed star8 DU crossing
  bool open_du = false;
  bool closed_star_lr = false;

  /// Exactly one side holds, in both orientations.
  bool holds() const noexcept { return (open_lr != closed_star_du) && (open_du != closed_star_lr); }
};

inline DualityResult crossing_duality_check(const GridConfiguration& config, const CrossingRectangle& rect) {
  DualityResult r;
  r.open_lr = has_crossing(config, rect, Direction::lr, Adjacency::grid4, Polarity::open);
  r.closed_star_du = has_crossing(config, rect, Direction::du, Adjacency::star8, Polarity::closed);
  r.open_du = has_crossing(config, rect, Direction::du, Adjacency::grid4, Polarity::open);
  r.closed_star_lr = has_crossing(config, rect, Direction::lr, Adjacency::star8, Polarity::closed);
  return r;
}

// --- surrounding and boundary reach (open cells = not L_5) ---

namespace detail {
/// BFS over open cells from every open seed; true if a box-boundary cell is reached.
inline bool open_reach_boundary(const GridGeometry& geom, const VertexMask& open,
                                const std::vector<Vertex>& seeds) {
  std::vector<std::uint8_t> seen(geom.cell_count(), 0);
  std::vector<Vertex> queue;
  for (Vertex s : seeds)
    if (open[s] && !seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex v = queue[head];
    if (geom.on_boundary(geom.coord(v))) return true;
    for_each_grid_neighbor(geom, v, Adjacency::grid4, [&](std::size_t w) {
      if (open[w] && !seen[w]) {
        seen[w] = 1;
        queue.push_back(static_cast<Vertex>(w));
      }
    });
  }
  return false;
}
}  // namespace detail

/// Origin's open grid4 component touches the box boundary (false if closed).
inline bool origin_reaches_boundary(const GridConfiguration& config) {
  return detail::open_reach_boundary(config.geom, config.open, {config.geom.index({0, 0})});
}

/// [-r, r]^2 is surrounded by an L_5 star-cycle inside the box, decided
/// through the dual: no open (non-L_5) grid4 path from the central box
/// reaches the boundary.
inline bool surrounded_check(const GridConfiguration& l5, int r) {
  const auto& geom = l5.geom;
  if (r < 0 || r >= geom.half_width - 1)
    throw InvalidParameter("surrounded_check: need 0 <= r < half_width - 1");
  VertexMask open(geom.cell_count());
  for (std::size_t v = 0; v < geom.cell_count(); ++v) open.set(v, !l5.open[v]);
  std::vector<Vertex> seeds;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) seeds.push_back(geom.index({x, y}));
  return !detail::open_reach_boundary(geom, open, seeds);
}

// --- annulus circuits ---

/// The four rectangles around [-2^k, 2^k]^2 with outer radius 2^(k+1).
inline std::array<CrossingRectangle, 4> annulus_rectangles(int k) {
  const int a = 1 << k;
  const int b = 1 << (k + 1);
  return {{{{-b, -b}, {-a, b}}, {{-b, -b}, {b, -a}}, {{-b, a}, {b, b}}, {{a, -b}, {b, b}}}};
}

/// All four rectangles carry both an open LR and an open DU grid4 crossing,
/// which certifies an open circuit around [-2^k, 2^k]^2.
inline bool annulus_circuit_check(const GridConfiguration& t4, int k) {
  if (k < 0 || k > 29 || (1 << (k + 1)) > t4.half_width())
    throw SizeError("annulus_circuit_check: annulus exceeds the box");
  for (const auto& rect : annulus_rectangles(k)) {
    if (!has_crossing(t4, rect, Direction::lr, Adjacency::grid4, Polarity::open)) return false;
    if (!has_crossing(t4, rect, Direction::du, Adjacency::grid4, Polarity::open)) return false;
  }
  return true;
}

// --- finite-box experiment ---

struct ThetaEstimate {
  std::vector<int> sizes;
  std::uint64_t trials = 0;
  std::vector<std::uint64_t> hits;
  std::vector<double> estimates;
  /// Largest-size estimate and its binomial interval.
  double pooled = 0.0;
  Interval pooled_interval;
  bool non_increasing = true;
};

/// One coupled sample for estimate_theta: ages drawn on `outer` and cut
/// down to every size; entry i says whether the origin's T_4 component
/// reaches the boundary of [-sizes[i], sizes[i]]^2.
inline std::vector<bool> theta_trial(const Graph& outer, const std::vector<int>& sizes, std::uint64_t seed) {
  const GridGeometry outer_geom = *outer.grid();
  const AgeAssignment ages = sample_ages(outer, seed);
  std::vector<bool> hits;
  for (int m : sizes) {
    const GridGeometry geom{m};
    const AgeAssignment sub = m == outer_geom.half_width ? ages : restrict_ages(outer_geom, ages, m);
    const GridConfiguration t4{geom, layers_up_to(grid_layer_labels(geom, sub), 4), GridSource::t4};
    hits.push_back(origin_reaches_boundary(t4));
  }
  return hits;
}

inline void check_theta_sizes(const std::vector<int>& sizes) {
  if (sizes.empty()) throw InvalidParameter("theta: no sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i)
    if (sizes[i] < 2 || (i > 0 && sizes[i] <= sizes[i - 1]))
      throw InvalidParameter("theta: sizes must be increasing and >= 2");
}

/// Frequency that the origin's T_4 component reaches the boundary of
/// [-n, n]^2, for each n, with all boxes cut from one sample on the largest.
inline ThetaEstimate estimate_theta(std::vector<int> sizes, std::uint64_t trials, std::uint64_t seed,
                                    double level = 0.997) {
  check_theta_sizes(sizes);
  ThetaEstimate est;
  est.sizes = sizes;
  est.trials = trials;
  est.hits.assign(sizes.size(), 0);
  const Graph outer = grid_box(sizes.back());
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto hits = theta_trial(outer, sizes, derive_seed(seed, {0x7468ULL, t}));
    for (std::size_t i = 0; i < sizes.size(); ++i) est.hits[i] += hits[i] ? 1 : 0;
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    est.estimates.push_back(trials == 0 ? 0.0 : static_cast<double>(est.hits[i]) / static_cast<double>(trials));
    if (i > 0 && est.hits[i] > est.hits[i - 1]) est.non_increasing = false;
  }
  est.pooled = est.estimates.back();
  est.pooled_interval = binomial_interval(est.hits.back(), trials, level);
  return est;
}

struct ComponentExtent {
  std::size_t size = 0;
  int diameter = 0;  // max of x-extent and y-extent
};

/// Size-ranked components (largest first, then by id) with their extents.
inline std::vector<ComponentExtent> ranked_extents(const GridGeometry& geom, const ComponentSummary& comps) {
  struct Box {
    int x0 = 1 << 30, x1 = -(1 << 30), y0 = 1 << 30, y1 = -(1 << 30);
  };
  std::vector<Box> boxes(comps.count);
  for (Vertex v = 0; v < geom.cell_count(); ++v) {
    const auto id = comps.component_id[v];
    if (id < 0) continue;
    const Coord c = geom.coord(v);
    Box& b = boxes[static_cast<std::size_t>(id)];
    b.x0 = std::min(b.x0, c.x);
    b.x1 = std::max(b.x1, c.x);
    b.y0 = std::min(b.y0, c.y);
    b.y1 = std::max(b.y1, c.y);
  }
  std::vector<std::size_t> order(comps.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return comps.sizes[a] > comps.sizes[b]; });
  std::vector<ComponentExtent> out;
  out.reserve(order.size());
  for (std::size_t id : order)
    out.push_back({comps.sizes[id], std::max(boxes[id].x1 - boxes[id].x0, boxes[id].y1 - boxes[id].y0)});
  return out;
}

struct T4BoxOptions {
  double epsilon = 0.1;
  /// Theta estimate the size threshold 4 n^2 (1 - epsilon) theta uses.
  double theta_hat = 0.0;
  /// L in the bound diameter <= L log n on non-giant components.
  double diameter_constant = 0.0;
  std::vector<int> surround_radii;
  std::vector<int> annulus_scales;
};

struct T4BoxTrial {
  std::uint64_t trial = 0;
  int n = 0;
  std::size_t largest = 0;
  /// Share of the window A_n covered by the largest component.
  double largest_window_fraction = 0.0;
  /// Largest component over the whole box, boundary rim included.
  double largest_box_fraction = 0.0;
  int second_diameter = 0;
  bool origin_to_boundary = false;
  std::vector<bool> surrounded;
  std::vector<bool> good;
  bool size_passed = false;
  bool diameter_passed = false;
};

struct T4BoxReport {
  int n = 0;
  T4BoxOptions options;
  double size_threshold = 0.0;
  double diameter_threshold = 0.0;
  std::vector<T4BoxTrial> trials;
};

inline T4BoxTrial t4_box_trial(const GridLayersSample& s, const T4BoxOptions& opt, std::uint64_t trial,
                               double size_threshold, double diameter_threshold) {
  const GridGeometry geom = s.t4.geom;
  const int n = geom.half_width;
  const auto comps = grid_components(geom, s.t4.open, Adjacency::grid4);
  const auto ranked = ranked_extents(geom, comps);
  T4BoxTrial row;
  row.trial = trial;
  row.n = n;
  row.largest = comps.largest;
  row.largest_box_fraction = static_cast<double>(comps.largest) / static_cast<double>(geom.cell_count());
  row.second_diameter = ranked.size() > 1 ? ranked[1].diameter : 0;
  if (!ranked.empty()) {
    // Id of the largest component: first id with the top size.
    const auto giant_id = static_cast<std::int64_t>(
        std::find(comps.sizes.begin(), comps.sizes.end(), comps.largest) - comps.sizes.begin());
    const int w = interior_window(n);
    std::size_t in_window = 0;
    std::size_t window_cells = 0;
    for (int y = -w; y <= w; ++y)
      for (int x = -w; x <= w; ++x) {
        ++window_cells;
        in_window += comps.component_id[geom.index({x, y})] == giant_id ? 1 : 0;
      }
    row.largest_window_fraction = window_cells == 0 ? 0.0 : static_cast<double>(in_window) / static_cast<double>(window_cells);
  }
  row.origin_to_boundary = origin_reaches_boundary(s.t4);
  for (int r : opt.surround_radii) row.surrounded.push_back(surrounded_check(s.l5, r));
  for (int k : opt.annulus_scales) row.good.push_back(annulus_circuit_check(s.t4, k));
  row.size_passed = static_cast<double>(row.largest) >= size_threshold;
  row.diameter_passed = static_cast<double>(row.second_diameter) <= diameter_threshold;
  return row;
}

/// Largest T_4 component against 4 n^2 (1 - eps) theta, and the second
/// largest component's diameter against L log n, over independent trials.
inline T4BoxReport t4_box_experiment(int n, const T4BoxOptions& opt, std::uint64_t trials, std::uint64_t seed) {
  if (n < 20) throw InvalidParameter("t4_box_experiment: n must be >= 20");
  T4BoxReport report;
  report.n = n;
  report.options = opt;
  const double nn = static_cast<double>(n);
  report.size_threshold = 4.0 * nn * nn * (1.0 - opt.epsilon) * opt.theta_hat;
  report.diameter_threshold = opt.diameter_constant * std::log(nn);
  const Graph box = grid_box(n);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto sample = grid_layers(box, derive_seed(seed, {0x7434ULL, t}));
    report.trials.push_back(t4_box_trial(sample, opt, t, report.size_threshold, report.diameter_threshold));
  }
  return report;
}

/// Rows: trial,n,largest,second_diameter,origin_to_boundary,surrounded_r...,good_k...
inline void write_csv(std::ostream& out, const T4BoxReport& r, bool header = true) {
  if (header) {
    out << "trial,n,largest,second_diameter,origin_to_boundary";
    for (int rad : r.options.surround_radii) out << ",surrounded_" << rad;
    for (int k : r.options.annulus_scales) out << ",good_" << k;
    out << '\n';
  }
  for (const auto& t : r.trials) {
    out << t.trial << ',' << t.n << ',' << t.largest << ',' << t.second_diameter << ','
        << (t.origin_to_boundary ? 1 : 0);
    for (bool b : t.surrounded) out << ',' << (b ? 1 : 0);
    for (bool b : t.good) out << ',' << (b ? 1 : 0);
    out << '\n';
  }
}

struct DecayFit {
  std::vector<double> tail;  // tail[k-1] = P(|C(0)| >= k)
  std::vector<std::uint64_t> tail_counts;
  double rate = 0.0;         // min over supported k of -ln(tail) / k
  std::uint64_t trials = 0;
};

/// Fits the cluster-size decay rate of independent site percolation: the
/// origin's open cluster is explored up to k_max cells.
inline DecayFit fit_cluster_decay(int half_width, double p, std::size_t k_max, std::uint64_t trials,
                                  std::uint64_t seed, std::uint64_t min_count = 20) {
  DecayFit fit;
  fit.trials = trials;
  fit.tail_counts.assign(k_max, 0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto config = grid_site_percolation(half_width, p, derive_seed(seed, {0x6463ULL, t}));
    const auto& geom = config.geom;
    const Vertex origin = geom.index({0, 0});
    if (!config.open[origin]) continue;
    std::vector<std::uint8_t> seen(geom.cell_count(), 0);
    std::vector<Vertex> queue{origin};
    seen[origin] = 1;
    for (std::size_t head = 0; head < queue.size() && queue.size() < k_max; ++head)
      for_each_grid_neighbor(geom, queue[head], Adjacency::grid4, [&](std::size_t w) {
        if (config.open[w] && !seen[w]) {
          seen[w] = 1;
          queue.push_back(static_cast<Vertex>(w));
        }
      });
    const std::size_t reached = std::min(queue.size(), k_max);
    for (std::size_t k = 0; k < reached; ++k) ++fit.tail_counts[k];
  }
  fit.rate = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < k_max; ++k) {
    const double f = trials == 0 ? 0.0 : static_cast<double>(fit.tail_counts[k]) / static_cast<double>(trials);
    fit.tail.push_back(f);
    if (fit.tail_counts[k] >= min_count) fit.rate = std::min(fit.rate, -std::log(f) / static_cast<double>(k + 1));
  }
  return fit;
}

/// Union bound on a failed annulus at scale k: 8 * 2^(k+1) * exp(-M 2^k).
inline double annulus_failure_bound(int k, double rate) {
  return 8.0 * std::ldexp(1.0, k + 1) * std::exp(-rate * std::ldexp(1.0, k));
}

// --- text dump: 0 closed, 1 T_4, 2 L_5; top row is y = n ---

inline void dump_configuration(std::ostream& out, const GridConfiguration& t4, const GridConfiguration& l5) {
  const int n = t4.half_width();
  for (int y = n; y >= -n; --y) {
    for (int x = -n; x <= n; ++x) out << (l5.is_open({x, y}) ? '2' : t4.is_open({x, y}) ? '1' : '0');
    out << '\n';
  }
}

inline void dump_configuration(std::ostream& out, const GridConfiguration& config) {
  const int n = config.half_width();
  for (int y = n; y >= -n; --y) {
    for (int x = -n; x <= n; ++x) out << (config.is_open({x, y}) ? '1' : '0');
    out << '\n';
  }
}

/// Parses a dump; cells equal to `open_value` become open.
inline GridConfiguration parse_configuration(std::istream& in, char open_value = '1') {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  if (rows.empty() || rows.size() % 2 == 0) throw ParseError("grid dump: need an odd number of rows");
  const int n = static_cast<int>(rows.size() / 2);
  auto config = GridConfiguration::filled(n, false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) throw ParseError("grid dump: ragged row");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const char ch = rows[r][c];
      if (ch != '0' && ch != '1' && ch != '2') throw ParseError("grid dump: bad cell character");
      config.set({static_cast<int>(c) - n, n - static_cast<int>(r)}, ch == open_value);
    }
  }
  return config;
}

}  // namespace layers
