#include "layers/experiment.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

using namespace layers;

ExperimentConfig small(const std::string& name, std::uint64_t trials = 20) {
  ExperimentConfig c;
  c.experiment = name;
  c.trials = trials;
  c.seed = 7;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "layers_test_experiment";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Validate, MandatoryFields) {
  auto c = small("p1p2");
  c.trials = 0;
  EXPECT_THROW(run(c), InvalidParameter);
  c.trials.reset();
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("p1p2");
  c.seed.reset();
  EXPECT_THROW(run(c), InvalidParameter);
  EXPECT_THROW(run(small("no_such_experiment")), InvalidParameter);
  EXPECT_THROW(run(small("")), InvalidParameter);
  c = small("p1p2");
  c.level = 1.0;
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("p1p2");
  c.workers = 0;
  EXPECT_THROW(run(c), InvalidParameter);
}

TEST(Validate, ExperimentParameters) {
  auto c = small("giant_t3");
  c.n = 11;
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("two_stage");
  c.p = 0.6;
  c.q = 0.5;
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("percolation_giant");
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("t4_box");
  c.n = 10;
  EXPECT_THROW(run(c), InvalidParameter);
  c = small("tk_size");
  EXPECT_THROW(run(c), InvalidParameter);
  c.family = "no_such_family";
  c.n = 10;
  EXPECT_THROW(run(c), InvalidParameter);
}

TEST(Run, UnwritableOutput) {
  auto c = small("p1p2", 2);
  c.n = 100;
  c.out = "/nonexistent_dir_for_layers/x/out";
  EXPECT_THROW(run(c), IoError);
}

TEST(Run, P1P2Summary) {
  auto c = small("p1p2", 50);
  c.n = 20000;
  const auto r = run(c);
  EXPECT_EQ(r.rows.size(), 50u);
  EXPECT_NEAR(r.aggregate("p1_hat").mean, 2.0 / 15.0, 0.01);
  EXPECT_NEAR(r.aggregate("p2_hat").mean, 1.0 / 9.0, 0.01);
  EXPECT_TRUE(r.aggregate("p1_hat").ci.contains(r.aggregate("p1_hat").mean));
  const auto j = r.to_json();
  EXPECT_TRUE(j.contains("verdicts"));
  for (const auto& v : j["verdicts"]) EXPECT_TRUE(v.contains("provenance"));
}

TEST(Run, ByteIdenticalJson) {
  auto c = small("t3_grid", 6);
  c.n = 20;
  c.out = scratch("a").string();
  run(c);
  const auto first = slurp(c.out + ".json");
  const auto first_csv = slurp(c.out + ".csv");
  run(c);
  EXPECT_EQ(slurp(c.out + ".json"), first);
  EXPECT_EQ(slurp(c.out + ".csv"), first_csv);
  EXPECT_FALSE(std::filesystem::exists(c.out + ".json.tmp"));
  const auto r = run(c);
  std::string header = "trial";
  for (const auto& col : r.columns) header += "," + col;
  EXPECT_EQ(first_csv.substr(0, first_csv.find('\n')), header);
  EXPECT_EQ(std::count(first_csv.begin(), first_csv.end(), '\n'), 7);
}

TEST(Run, WorkersDoNotChangeResults) {
  for (const char* name : {"p1p2", "aux_h", "grid_theta"}) {
    auto c = small(name, 70);
    if (std::string(name) == "grid_theta") c.sizes = {4, 8};
    else c.n = 500;
    c.workers = 1;
    const auto one = run(c).to_json().dump();
    c.workers = 4;
    EXPECT_EQ(run(c).to_json().dump(), one) << name;
  }
}

TEST(Run, SeedChangesRows) {
  auto c = small("p1p2", 3);
  c.n = 1000;
  const auto a = run(c);
  c.seed = 8;
  EXPECT_NE(run(c).rows, a.rows);
}

TEST(Run, EveryRegisteredExperimentRunsSmall) {
  std::map<std::string, ExperimentConfig> cfgs;
  for (const auto& [name, factory] : experiment_registry()) cfgs[name] = small(name, 4);
  cfgs["p1p2"].n = 200;
  cfgs["tk_size"].family = "grid";
  cfgs["tk_size"].n = 5;
  cfgs["giant_t3"].n = 200;
  cfgs["percolation_giant"].n = 200;
  cfgs["percolation_giant"].p = 0.7;
  cfgs["two_stage"].n = 10;
  cfgs["two_stage"].p = 0.3;
  cfgs["two_stage"].q = 0.6;
  cfgs["retention"].p = 0.3;
  cfgs["retention"].q = 0.6;
  cfgs["monotone_tree"].depth = 6;
  cfgs["monotone_growth"].family = "cycle";
  cfgs["monotone_growth"].n = 100;
  cfgs["t4_box"].n = 20;
  cfgs["t4_box"].scales = {1};
  cfgs["t4_box"].sizes = {0};
  cfgs["grid_theta"].sizes = {3, 6};
  cfgs["annulus"].n = 16;
  cfgs["t3_grid"].n = 10;
  cfgs["aux_h"].n = 200;
  for (const auto& [name, c] : cfgs) {
    const auto r = run(c);
    EXPECT_EQ(r.rows.size(), 4u) << name;
    for (const auto& row : r.rows) EXPECT_EQ(row.size(), r.columns.size()) << name;
    EXPECT_EQ(r.to_json()["config"]["experiment"], name);
  }
}

TEST(Config, JsonRoundTrip) {
  auto c = small("t4_box", 3);
  c.n = 30;
  c.epsilon = 0.2;
  c.sizes = {1, 2};
  c.scales = {1};
  const auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Config, RejectsUnknownAndBadKeys) {
  EXPECT_THROW(ExperimentConfig::from_json(json{{"experiment", "p1p2"}, {"bogus", 1}}), ParseError);
  EXPECT_THROW(ExperimentConfig::from_json(json{{"trials", "many"}}), ParseError);
  EXPECT_THROW(ExperimentConfig::from_json(json::array()), ParseError);
}

TEST(Config, LoadFileWithComments) {
  const auto path = scratch("c.json");
  {
    std::ofstream out(path);
    out << "{\n  // pinned for the test\n  \"experiment\": \"p1p2\", \"n\": 100, \"trials\": 2, \"seed\": 3\n}\n";
  }
  const auto c = ExperimentConfig::load(path.string());
  EXPECT_EQ(c.experiment, "p1p2");
  EXPECT_EQ(*c.n, 100u);
  EXPECT_THROW(ExperimentConfig::load(scratch("missing.json").string()), IoError);
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  EXPECT_THROW(ExperimentConfig::load(path.string()), ParseError);
}

TEST(Config, ShippedConfigsParse) {
  const std::filesystem::path dir = std::filesystem::path(LAYERS_TEST_DATA).parent_path().parent_path() / "configs";
  ASSERT_TRUE(std::filesystem::exists(dir));
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    const auto c = ExperimentConfig::load(entry.path().string());
    EXPECT_EQ(experiment_registry().count(c.experiment), 1u) << entry.path();
    EXPECT_TRUE(c.seed && c.trials) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 2u);
}

}  // namespace
