// Command-line front end: graph generation, single-sample operations,
// configured experiments, the acceptance ledger, and replay.

#include "layers/acceptance.hpp"
#include "layers/experiment.hpp"
#include "layers/invariants.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

using namespace layers;

constexpr int kExitVerdictFailed = 1;
constexpr int kExitError = 2;

/// Opens `path` for writing, or returns stdout when path is empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw IoError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

Graph load_graph(const std::string& path, std::optional<int> half_width) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read graph '" + path + "'");
  Graph g = read_edge_list(in);
  if (!half_width) return g;
  const GridGeometry geom{*half_width};
  if (geom.cell_count() != g.vertex_count()) throw InvalidParameter("--half-width does not match the graph size");
  const auto edges = g.edges();
  return Graph::from_edges(g.vertex_count(), edges, geom);
}

AgeAssignment load_or_sample_ages(const Graph& g, const std::string& ages_path, std::optional<std::uint64_t> seed) {
  if (!ages_path.empty()) {
    std::ifstream in(ages_path);
    if (!in) throw IoError("cannot read ages '" + ages_path + "'");
    return read_ages(in, g.vertex_count());
  }
  if (!seed) throw InvalidParameter("either --ages or --seed is required");
  return sample_ages(g, *seed);
}

Adjacency parse_mode(const std::string& mode) {
  if (mode == "graph") return Adjacency::graph;
  if (mode == "grid4") return Adjacency::grid4;
  if (mode == "star8") return Adjacency::star8;
  throw InvalidMode("unknown adjacency mode '" + mode + "'");
}

void write_components_csv(std::ostream& out, const ComponentSummary& comps) { write_csv(out, comps); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layers-model graph experiments"};
  app.require_subcommand(1);

  // generate
  ExperimentConfig gen;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  auto* generate = app.add_subcommand("generate", "Write a graph family as an edge list");
  generate->add_option("--family", gen.family, "cycle, path, complete, cycle_matching, regular, binary_tree, grid, stars, dary")
      ->required();
  generate->add_option("--n", gen.n, "Size parameter");
  generate->add_option("--d", gen.d, "Degree, arity or star size");
  generate->add_option("--depth", gen.depth, "Tree depth");
  generate->add_option("--seed", gen_seed, "Seed for random families");
  generate->add_option("--out", gen_out, "Output file (default stdout)");

  // layers / components / percolate share inputs
  std::string graph_path, ages_path, op_out, mode = "graph";
  std::optional<std::uint64_t> op_seed;
  std::optional<int> half_width;
  std::uint32_t op_k = 2;
  double op_p = 0.5;
  auto add_inputs = [&](CLI::App* sub, bool with_ages) {
    sub->add_option("--graph", graph_path, "Edge-list file")->required();
    if (with_ages) sub->add_option("--ages", ages_path, "Ages file (one per line)");
    sub->add_option("--seed", op_seed, "Seed (ages or percolation)");
    sub->add_option("--half-width", half_width, "Attach grid coordinates of [-h, h]^2");
    sub->add_option("--out", op_out, "Output CSV (default stdout)");
  };
  auto* layers_cmd = app.add_subcommand("layers", "Ages and layer of every vertex");
  add_inputs(layers_cmd, true);
  auto* components_cmd = app.add_subcommand("components", "Components of T_k");
  add_inputs(components_cmd, true);
  components_cmd->add_option("--k", op_k, "Layer bound k");
  components_cmd->add_option("--mode", mode, "graph, grid4 or star8");
  auto* percolate_cmd = app.add_subcommand("percolate", "Components of site percolation G_p");
  add_inputs(percolate_cmd, false);
  percolate_cmd->add_option("--p", op_p, "Retention probability")->required();
  percolate_cmd->add_option("--mode", mode, "graph, grid4 or star8");

  // experiment
  ExperimentConfig cfg;
  std::string config_path, name;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a configured experiment");
  experiment_cmd->add_option("name", name, "Experiment name");
  experiment_cmd->add_option("--config", config_path, "JSON config; flags override its fields");
  ExperimentConfig flags;
  experiment_cmd->add_option("--seed", flags.seed);
  experiment_cmd->add_option("--trials", flags.trials);
  experiment_cmd->add_option("--family", flags.family);
  experiment_cmd->add_option("--n", flags.n);
  experiment_cmd->add_option("--k", flags.k);
  experiment_cmd->add_option("--d", flags.d);
  experiment_cmd->add_option("--depth", flags.depth);
  experiment_cmd->add_option("--p", flags.p);
  experiment_cmd->add_option("--q", flags.q);
  experiment_cmd->add_option("--epsilon", flags.epsilon);
  experiment_cmd->add_option("--delta", flags.delta);
  experiment_cmd->add_option("--root-age", flags.root_age);
  experiment_cmd->add_option("--theta", flags.theta);
  experiment_cmd->add_option("--diameter-constant", flags.diameter_constant);
  experiment_cmd->add_option("--sizes", flags.sizes)->delimiter(',');
  experiment_cmd->add_option("--scales", flags.scales)->delimiter(',');
  std::optional<double> level;
  std::optional<unsigned> workers;
  experiment_cmd->add_option("--level", level, "Confidence level (default 3 sigma)");
  experiment_cmd->add_option("--workers", workers, "Worker threads");
  experiment_cmd->add_option("--out", flags.out, "Output prefix: <out>.csv and <out>.json");
  experiment_cmd->add_flag("--list", "List experiment names");

  // accept
  std::uint64_t accept_seed = calibration::kAcceptanceSeed;
  std::vector<int> only;
  auto* accept_cmd = app.add_subcommand("accept", "Run the acceptance ledger");
  accept_cmd->add_option("--seed", accept_seed);
  accept_cmd->add_option("--only", only, "Criterion ids to run")->delimiter(',');

  // replay
  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-check a saved (graph, ages) sample");
  replay_cmd->add_option("file", replay_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      Output out(gen_out);
      write_edge_list(out.stream(), build_family(gen, gen_seed));
      return 0;
    }
    if (layers_cmd->parsed()) {
      const Graph g = load_graph(graph_path, half_width);
      const auto ages = load_or_sample_ages(g, ages_path, op_seed);
      const auto labels = compute_layers(g, ages);
      Output out(op_out);
      out.stream() << "vertex,age,layer\n";
      for (Vertex v = 0; v < g.vertex_count(); ++v)
        out.stream() << v << ',' << format_double(ages[v]) << ',' << labels[v] << '\n';
      return 0;
    }
    if (components_cmd->parsed()) {
      const Graph g = load_graph(graph_path, half_width);
      const auto labels = compute_layers(g, load_or_sample_ages(g, ages_path, op_seed));
      Output out(op_out);
      write_components_csv(out.stream(), connected_components(g, layers_up_to(labels, op_k), parse_mode(mode)));
      return 0;
    }
    if (percolate_cmd->parsed()) {
      const Graph g = load_graph(graph_path, half_width);
      if (!op_seed) throw InvalidParameter("--seed is required");
      Output out(op_out);
      write_components_csv(out.stream(), connected_components(g, site_percolation(g, op_p, *op_seed), parse_mode(mode)));
      return 0;
    }
    if (experiment_cmd->parsed()) {
      if (experiment_cmd->count("--list")) {
        for (const auto& [n, f] : experiment_registry()) std::cout << n << '\n';
        return 0;
      }
      cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
      if (!name.empty()) cfg.experiment = name;
      auto over = [](auto& dst, const auto& src) {
        if (src) dst = src;
      };
      over(cfg.seed, flags.seed);
      over(cfg.trials, flags.trials);
      over(cfg.n, flags.n);
      over(cfg.k, flags.k);
      over(cfg.d, flags.d);
      over(cfg.depth, flags.depth);
      over(cfg.p, flags.p);
      over(cfg.q, flags.q);
      over(cfg.epsilon, flags.epsilon);
      over(cfg.delta, flags.delta);
      over(cfg.root_age, flags.root_age);
      over(cfg.theta, flags.theta);
      over(cfg.diameter_constant, flags.diameter_constant);
      if (!flags.family.empty()) cfg.family = flags.family;
      if (!flags.sizes.empty()) cfg.sizes = flags.sizes;
      if (!flags.scales.empty()) cfg.scales = flags.scales;
      if (!flags.out.empty()) cfg.out = flags.out;
      if (level) cfg.level = *level;
      if (workers) cfg.workers = *workers;
      const auto report = run(cfg);
      std::cout << report.to_json().dump(2) << '\n';
      return report.passed() ? 0 : kExitVerdictFailed;
    }
    if (accept_cmd->parsed()) {
      const auto results = acceptance::run_suite(accept_seed, std::cout, {only.begin(), only.end()});
      return acceptance::all_passed(results) ? 0 : kExitVerdictFailed;
    }
    if (replay_cmd->parsed()) {
      std::ifstream in(replay_path);
      if (!in) throw IoError("cannot read '" + replay_path + "'");
      const auto diagnosis = replay(in);
      std::cout << diagnosis.describe() << '\n';
      return diagnosis.result.ok ? 0 : kExitVerdictFailed;
    }
  } catch (const TieError& e) {
    std::cerr << "tie error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
