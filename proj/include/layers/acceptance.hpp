#pragma once

// The acceptance ledger: one verdict per criterion, tolerances pinned here
// and in calibration.hpp.

#include "layers/calibration.hpp"
#include "layers/components.hpp"
#include "layers/experiment.hpp"
#include "layers/generators.hpp"
#include "layers/grid.hpp"
#include "layers/invariants.hpp"
#include "layers/layers_model.hpp"
#include "layers/random.hpp"
#include "layers/rational.hpp"
#include "layers/stats.hpp"
#include "layers/treewidth.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace layers::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

class Detail {
 public:
  template <class T>
  Detail& operator<<(const T& x) {
    out_ << x;
    return *this;
  }
  /// Drops the separator left by the last item.
  std::string str() const {
    std::string s = out_.str();
    while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
    return s;
  }

 private:
  std::ostringstream out_;
};

inline std::string fmt(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

/// |mean - target| <= z * sem, with a readable detail string.
inline bool within_sigmas(const RunningStats& s, double target, double z, const std::string& label,
                          Detail& detail) {
  const double tol = z * s.sem();
  const bool ok = std::abs(s.mean() - target) <= tol;
  detail << label << " " << fmt(s.mean()) << " vs " << fmt(target) << " (+-" << fmt(tol) << ")"
         << (ok ? "" : " FAIL") << "; ";
  return ok;
}

inline bool verdicts_line(const ExperimentReport& r, Detail& detail) {
  for (const auto& v : r.verdicts)
    detail << v.name << " " << fmt(v.observed) << " " << v.relation << " " << fmt(v.target)
           << (v.tolerance > 0 ? " +-" + fmt(v.tolerance) : std::string()) << " [" << to_string(v.provenance) << "]"
           << (v.passed ? "" : " FAIL") << "; ";
  return r.passed();
}

inline ExperimentConfig make_config(const std::string& name, std::uint64_t seed, std::uint64_t trials) {
  ExperimentConfig c;
  c.experiment = name;
  c.seed = seed;
  c.trials = trials;
  return c;
}

}  // namespace detail

// 1. Exact Molloy-Reed value of the smoothed H degree distribution.
inline CriterionResult molloy_reed_exact(std::uint64_t) {
  detail::Detail d;
  const MolloyReedInput in{{{1, make_rational(21, 30)}, {2, make_rational(5, 30)},
                            {3, make_rational(2, 30)}, {4, make_rational(2, 30)}}};
  const Rational q = molloy_reed_q(in);
  d << "Q = " << to_string(q);
  return {1, "molloy_reed_q exact", q == make_rational(1, 30), d.str()};
}

// 2. Exhaustive orderings: the isolated-T2-vertex pattern and BIN_4 survival.
inline CriterionResult exact_enumerations(std::uint64_t) {
  detail::Detail d;
  // Vertex 2 of a 5-path sees the same neighborhoods as a cycle vertex with
  // two neighbors on each side.
  const Graph window = path_graph(5);
  std::vector<Vertex> perm{0, 1, 2, 3, 4};
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  do {
    const auto labels = compute_layers(window, permutation_to_ages(perm));
    ++total;
    hits += labels[1] == 3 && labels[3] == 3 && labels[2] <= 2 ? 1 : 0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  const auto bin4 = binary_tree_survival(4, SurvivalMode::exact);
  const double lower = std::ldexp(1.0, -8);
  d << "p1 pattern " << hits << "/" << total << "; BIN4 full survival " << bin4.successes << "/" << bin4.total
    << " >= 2^-8";
  const bool ok = hits == 16 && total == 120 && bin4.successes == 4 && bin4.total == 6 &&
                  bin4.probability() >= lower;
  return {2, "exact enumerations", ok, d.str()};
}

// 3. Cycle segment statistics at n = 10^5.
inline CriterionResult cycle_segments(std::uint64_t seed) {
  detail::Detail d;
  auto c = detail::make_config("p1p2", derive_seed(seed, {3}), 50);
  c.n = 100000;
  const auto r = run(c);
  const bool ok = detail::verdicts_line(r, d);
  return {3, "cycle p1/p2, |T2|, components", ok, d.str()};
}

// 4. Structural properties over sampled (graph, ages) pairs.
struct PropertySample {
  std::string family;
  Graph graph;
};

inline PropertySample property_graph(std::uint64_t index, std::uint64_t seed) {
  Engine rng = make_engine(seed, {0x70726f70ULL, index});
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return lo + uniform_below(rng, hi - lo + 1); };
  const std::uint64_t s = rng();
  switch (index % 10) {
    case 0: return {"cycle", cycle_graph(pick(3, 200))};
    case 1: return {"path", path_graph(pick(1, 200))};
    case 2: return {"complete", complete_graph(pick(1, 12))};
    case 3: return {"cycle_matching", cycle_plus_matching(2 * pick(2, 100), s).graph};
    case 4: {
      const auto n = static_cast<std::uint32_t>(pick(2, 100));
      std::vector<std::uint32_t> degrees(n);
      std::uint64_t sum = 0;
      for (auto& deg : degrees) sum += deg = static_cast<std::uint32_t>(pick(0, 6));
      if (sum % 2 == 1) ++degrees[0];
      std::map<std::uint32_t, std::uint32_t> counts;
      for (auto deg : degrees) ++counts[deg];
      DegreeSequence seq;
      for (auto [deg, cnt] : counts) seq.entries.push_back({deg, cnt});
      return {"configuration", without_loops(configuration_model(seq, s))};
    }
    case 5: return {"binary_tree", complete_binary_tree(std::size_t{1} << pick(1, 7))};
    case 6: return {"grid", grid_box(static_cast<int>(pick(1, 8)))};
    case 7: return {"stars", star_collection(pick(1, 10), pick(1, 8))};
    case 8: return {"subdivided_complete", subdivide_edges(complete_graph(pick(2, 8))).graph};
    default: return {"dary", d_ary_tree(pick(1, 4), pick(0, 5))};
  }
}

inline constexpr std::uint64_t kPropertySamples = 1200;

inline CriterionResult property_suite(std::uint64_t seed) {
  detail::Detail d;
  const std::uint64_t s4 = derive_seed(seed, {4});
  std::map<std::string, std::uint64_t> per_family;
  std::uint64_t forests = 0;
  for (std::uint64_t i = 0; i < kPropertySamples; ++i) {
    const auto sample = property_graph(i, s4);
    const AgeAssignment ages = sample_ages(sample.graph, derive_seed(s4, {i}));
    const auto result = evaluate_invariant("all", sample.graph, ages);
    if (!result.ok) {
      const std::string path = "property_counterexample_" + std::to_string(i) + ".replay";
      std::ofstream out(path);
      write_replay(out, {"all", sample.graph, ages});
      d << "sample " << i << " (" << sample.family << "): " << result.trace << "; saved " << path;
      return {4, "property suite", false, d.str()};
    }
    ++per_family[sample.family];
    ++forests;
  }
  d << kPropertySamples << " samples, T2 forest in " << forests << "/" << kPropertySamples << "; families:";
  for (const auto& [f, n] : per_family) d << " " << f << "=" << n;
  return {4, "property suite", true, d.str()};
}

// 5. E|T_k| against the exact formula.
inline RunningStats tk_sizes(const std::function<Graph(std::uint64_t)>& make, std::uint32_t k,
                             std::uint64_t trials, std::uint64_t seed) {
  RunningStats s;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Graph g = make(t);
    const auto labels = compute_layers(g, sample_ages(g, derive_seed(seed, {t, 1})));
    s.add(static_cast<double>(layers_up_to(labels, k).count()));
  }
  return s;
}

inline CriterionResult tk_expectation(std::uint64_t seed) {
  detail::Detail d;
  const double z = z_for_level(calibration::kThreeSigmaLevel);
  const std::uint64_t s5 = derive_seed(seed, {5});
  bool ok = true;

  const std::size_t n = 10000;
  const auto cm = tk_sizes([&](std::uint64_t t) { return cycle_plus_matching(n, derive_seed(s5, {t, 0})).graph; },
                           3, 200, derive_seed(s5, {1}));
  ok &= detail::within_sigmas(cm, 3.0 * n / 4.0, z, "cycle+matching k=3", d);

  const Graph grid = grid_box(30);
  for (std::uint32_t k : {2U, 3U, 4U}) {
    const auto s = tk_sizes([&](std::uint64_t) { return grid; }, k, 200, derive_seed(s5, {2, k}));
    ok &= detail::within_sigmas(s, to_double(expected_tk_size(grid, k)), z, "grid30 k=" + std::to_string(k), d);
  }
  const Graph stars = star_collection(200, 5);
  for (std::uint32_t k : {1U, 2U}) {
    const auto s = tk_sizes([&](std::uint64_t) { return stars; }, k, 200, derive_seed(s5, {3, k}));
    ok &= detail::within_sigmas(s, to_double(expected_tk_size(stars, k)), z, "stars k=" + std::to_string(k), d);
  }
  return {5, "E|T_k| formula", ok, d.str()};
}

// 6. T_3 giant on cycle + matching.
inline CriterionResult t3_giant(std::uint64_t seed) {
  detail::Detail d;
  auto c = detail::make_config("giant_t3", derive_seed(seed, {6}), 20);
  c.n = 10000;
  c.delta = calibration::kT3GiantDelta;
  const auto r = run(c);
  const bool ok = detail::verdicts_line(r, d);
  return {6, "T3 giant on cycle+matching", ok, d.str()};
}

// 7. Percolated random 3-regular graph on both sides of p = 1/2.
inline CriterionResult percolation_giant(std::uint64_t seed) {
  detail::Detail d;
  bool ok = true;
  for (double p : {0.6, 0.3}) {
    auto c = detail::make_config("percolation_giant", derive_seed(seed, {7, p > 0.5 ? 1ULL : 2ULL}), 20);
    c.n = 10000;
    c.d = 3;
    c.p = p;
    c.delta = calibration::kPercolationDelta;
    const auto r = run(c);
    d << "p=" << p << ": ";
    ok &= detail::verdicts_line(r, d);
  }
  return {7, "percolated 3-regular giant", ok, d.str()};
}

// 8. Monotone component of the root of a binary tree.
inline constexpr std::uint64_t kMonotoneSamples = 100000;

inline CriterionResult monotone_tree(std::uint64_t seed) {
  detail::Detail d;
  const std::size_t depth = 14;
  const Graph tree = d_ary_tree(2, depth);
  const auto sizes = monotone_root_sizes(tree, 0, 1.0, kMonotoneSamples, derive_seed(seed, {8}));
  RunningStats s;
  for (auto x : sizes) s.add(static_cast<double>(x));
  const double target = truncated_exponential(2.0, depth);
  d << "e^2 = " << detail::fmt(std::exp(2.0)) << ", truncated at depth " << depth << " = " << detail::fmt(target)
    << "; ";
  const bool ok = detail::within_sigmas(s, target, z_for_level(calibration::kThreeSigmaLevel), "mean |C_mon(root)|", d);
  return {8, "monotone components on binary tree", ok, d.str()};
}

// 9. Grid invariants and crossing duality.
inline constexpr std::uint64_t kGridSamples = 1000;
inline constexpr std::uint64_t kDualityConfigs = 100000;

inline CriterionResult grid_invariants(std::uint64_t seed) {
  detail::Detail d;
  const std::uint64_t s9 = derive_seed(seed, {9});
  const Graph box = grid_box(100);
  std::uint64_t independent = 0, pure = 0, coupled = 0;
  for (std::uint64_t t = 0; t < kGridSamples; ++t) {
    const auto s = grid_layers(box, derive_seed(s9, {1, t}));
    independent += open_cells_independent(s.l5) ? 1 : 0;
    pure += star_components_parity_pure(s.l5) ? 1 : 0;
    coupled += coupling_domination_check(s.ages, s.l5).violations.empty() ? 1 : 0;
  }
  const bool phi = phi_isomorphism_check(100);

  const CrossingRectangle rect{{-4, -4}, {3, 3}};
  const double ps[] = {0.2, 0.5, 0.8};
  std::uint64_t dual_ok = 0, paths_ok = 0, paths = 0;
  for (std::uint64_t t = 0; t < kDualityConfigs; ++t) {
    const auto config = grid_site_percolation(4, ps[t % 3], derive_seed(s9, {2, t}));
    const auto r = crossing_duality_check(config, rect);
    dual_ok += r.holds() ? 1 : 0;
    const struct {
      Direction dir;
      Adjacency adj;
      Polarity pol;
    } kinds[] = {{Direction::lr, Adjacency::grid4, Polarity::open},
                 {Direction::du, Adjacency::star8, Polarity::closed}};
    for (const auto& k : kinds)
      if (auto path = find_crossing(config, rect, k.dir, k.adj, k.pol)) {
        ++paths;
        paths_ok += verify_crossing(config, rect, k.dir, k.adj, k.pol, *path) ? 1 : 0;
      }
  }
  d << "n=100: L5 independent " << independent << "/" << kGridSamples << ", parity-pure " << pure << "/"
    << kGridSamples << ", coupling clean " << coupled << "/" << kGridSamples << ", phi " << (phi ? "ok" : "FAIL")
    << "; 8x8 duality " << dual_ok << "/" << kDualityConfigs << ", crossings verified " << paths_ok << "/" << paths;
  const bool ok = independent == kGridSamples && pure == kGridSamples && coupled == kGridSamples && phi &&
                  dual_ok == kDualityConfigs && paths_ok == paths;
  return {9, "grid invariants and crossing duality", ok, d.str()};
}

// 10. Finite-box stabilization of the T_4 giant.
inline constexpr std::uint64_t kThetaTrials = 1000;
inline constexpr std::uint64_t kFractionTrials = 100;
inline constexpr std::uint64_t kDiameterPilotTrials = 300;
inline constexpr std::uint64_t kDiameterTestTrials = 300;

inline CriterionResult t4_stabilization(std::uint64_t seed) {
  detail::Detail d;
  const std::uint64_t s10 = derive_seed(seed, {10});
  bool ok = true;

  auto theta = detail::make_config("grid_theta", derive_seed(s10, {1}), kThetaTrials);
  theta.sizes = {50, 100, 200};
  const auto tr = run(theta);
  d << "theta_hat";
  for (const auto& col : tr.columns) d << " " << col.substr(4) << ":" << detail::fmt(tr.aggregate(col).mean);
  d << "; ";
  ok &= detail::verdicts_line(tr, d);

  // Largest-component share of the window A_n at each size.
  std::vector<double> fractions;
  for (int n : {50, 100, 200}) {
    auto c = detail::make_config("t4_box", derive_seed(s10, {2, static_cast<std::uint64_t>(n)}), kFractionTrials);
    c.n = static_cast<std::uint64_t>(n);
    fractions.push_back(run(c).aggregate("window_fraction").mean);
  }
  double spread = 0.0;
  for (double f : fractions) spread = std::max(spread, std::abs(f - fractions.back()));
  d << "window fractions " << detail::fmt(fractions[0]) << " " << detail::fmt(fractions[1]) << " "
    << detail::fmt(fractions[2]) << ", spread " << detail::fmt(spread) << " <= "
    << calibration::kFractionTolerance << (spread <= calibration::kFractionTolerance ? "" : " FAIL") << "; ";
  ok &= spread <= calibration::kFractionTolerance;

  // L fitted on n = 50 and 100, then tested out of sample at n = 200.
  double fitted = 0.0;
  for (int n : {50, 100}) {
    auto c = detail::make_config("t4_box", derive_seed(s10, {3, static_cast<std::uint64_t>(n)}), kDiameterPilotTrials);
    c.n = static_cast<std::uint64_t>(n);
    for (double diam : run(c).values("second_diameter")) fitted = std::max(fitted, diam / std::log(n));
  }
  auto test = detail::make_config("t4_box", derive_seed(s10, {4}), kDiameterTestTrials);
  test.n = 200;
  test.diameter_constant = fitted;
  test.theta = tr.scalars.at("theta_hat");
  const auto rt = run(test);
  const double rate = rt.aggregate("diameter_passed").mean;
  d << "fitted L " << detail::fmt(fitted) << ", n=200 diameter pass rate " << detail::fmt(rate)
    << " >= " << calibration::kDiameterPassRate << (rate >= calibration::kDiameterPassRate ? "" : " FAIL");
  ok &= rate >= calibration::kDiameterPassRate;
  return {10, "T4 finite-box stabilization", ok, d.str()};
}

// 11. Treewidth oracle and the separator bound on all small connected graphs.
inline CriterionResult treewidth_checks(std::uint64_t) {
  detail::Detail d;
  const int tree = exact_treewidth(d_ary_tree(2, 2));
  const int c8 = exact_treewidth(cycle_graph(8));
  const int k4 = exact_treewidth(complete_graph(4));
  const int g3 = exact_treewidth(grid_box(1));
  bool ok = tree == 1 && c8 == 2 && k4 == 3 && g3 == 3;
  d << "tree " << tree << ", C8 " << c8 << ", K4 " << k4 << ", 3x3 grid " << g3 << "; ";

  std::uint64_t checked = 0, bounded = 0;
  for (std::size_t n = 1; n <= 7; ++n) {
    std::vector<Edge> all;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v) all.push_back({u, v});
    const std::uint64_t subsets = std::uint64_t{1} << all.size();
    std::vector<Edge> edges;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      // Connected graphs on n vertices have at least n - 1 edges.
      if (static_cast<std::size_t>(std::popcount(mask)) + 1 < n) continue;
      edges.clear();
      for (std::size_t i = 0; i < all.size(); ++i)
        if (mask >> i & 1) edges.push_back(all[i]);
      const Graph g = Graph::from_edges(n, edges);
      if (connected_components(g, VertexMask(n, true)).count != 1) continue;
      ++checked;
      const int tw = exact_treewidth(g);
      bounded += min_balanced_separator(g, static_cast<std::size_t>(tw) + 1).has_value() ? 1 : 0;
    }
  }
  d << "separator <= tw+1 on " << bounded << "/" << checked << " connected graphs (n <= 7)";
  ok &= bounded == checked && checked > 0;
  return {11, "treewidth oracle and separator bound", ok, d.str()};
}

// 12. Two-stage exposure reproduces G_p.
inline constexpr std::uint64_t kRetentionTrials = 100000;

inline CriterionResult two_stage(std::uint64_t seed) {
  detail::Detail d;
  const double p = 0.6, q = 0.8;
  const std::size_t n = 10;
  const auto c = two_stage_retention(n, p, q, kRetentionTrials, derive_seed(seed, {12}));
  const double z = calibration::kFourSigma;
  auto check = [&](const std::string& label, std::uint64_t hits, std::uint64_t draws, double target) {
    const double f = static_cast<double>(hits) / static_cast<double>(draws);
    const double tol = z * binomial_sigma(target, draws);
    const bool ok = std::abs(f - target) <= tol;
    d << label << " " << detail::fmt(f) << " vs " << detail::fmt(target) << " (+-" << detail::fmt(tol) << ")"
      << (ok ? "" : " FAIL") << "; ";
    return ok;
  };
  bool ok = check("vertex 0", c.vertex_hits, c.trials, p);
  ok &= check("pair (0,1)", c.pair_hits, c.trials, p * p);
  ok &= check("pooled", c.pooled_hits, c.trials * n, p);
  return {12, "two-stage exposure", ok, d.str()};
}

using Criterion = std::function<CriterionResult(std::uint64_t)>;

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{molloy_reed_exact, exact_enumerations, cycle_segments, property_suite,
                                          tk_expectation,   t3_giant,           percolation_giant, monotone_tree,
                                          grid_invariants,  t4_stabilization,   treewidth_checks,  two_stage};
  return all;
}

/// Runs the selected criteria (all when `only` is empty), printing one
/// ledger line per criterion as it finishes.
inline std::vector<CriterionResult> run_suite(std::uint64_t seed, std::ostream& log, const std::set<int>& only = {}) {
  std::vector<CriterionResult> results;
  for (const auto& criterion : criteria()) {
    const int id = static_cast<int>(results.size() + 1);
    if (!only.empty() && !only.count(id)) {
      results.push_back({id, "", true, "skipped", 0.0});
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = criterion(seed);
    } catch (const std::exception& e) {
      r = {id, "error", false, e.what()};
    }
    r.id = id;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.name << "  (" << detail::fmt(r.seconds)
        << " s)  " << r.detail << '\n';
    log.flush();
    results.push_back(std::move(r));
  }
  return results;
}

inline bool all_passed(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

}  // namespace layers::acceptance
