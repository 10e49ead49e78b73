#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dyson/cli/commands.hpp"
#include "dyson/cli/config.hpp"
#include "dyson/cli/verify.hpp"

using namespace dyson;
using namespace dyson::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("dyson_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(DYSON_TOOL_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Io, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, k % 40 - 20);
    EXPECT_EQ(parse_double(format_double(v), "v"), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_THROW(parse_double("1.5x", "f"), ValidationError);
}

TEST(Config, RoundTripsLosslessly) {
  RunConfig c;
  c.output_dir = "runs/a";
  c.measure.kind = "atoms";
  c.measure.atoms = {{-1.0 / 3.0, 0.25}, {0.1, 0.75}};
  c.sim = {123, 4.0, 1.0 / 7.0, 9223372036854775813ULL, 2.5};
  c.sample_times = {0.1, 1.0 / 3.0};
  c.histogram = {-2.0, 2.0, 17};
  c.control.drift_budget = 3e-3;
  c.times = {0.25, 2.0};
  c.grid = {-3.5, 3.5, 71};
  c.green_eps = 1e-3;
  c.support = {0.5, 1.5, 3, {0.7, -2.0}};
  c.suite = "hilbert";
  c.mutation = "hilbert_sign";
  const std::string text = dump(c);
  const RunConfig back = from_json(nlohmann::json::parse(text));
  EXPECT_EQ(dump(back), text);
  EXPECT_EQ(back.sim.seed, c.sim.seed);
  EXPECT_EQ(back.sim.dt, c.sim.dt);
  EXPECT_EQ(back.measure.atoms[0].location, -1.0 / 3.0);
  EXPECT_EQ(back.sample_times[1], 1.0 / 3.0);
  EXPECT_EQ(back.control.drift_budget, 3e-3);
}

TEST(Config, ErrorsCarryFieldPaths) {
  try {
    from_json(nlohmann::json::parse(R"({"sim": {"betta": 2}})"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field, "sim.betta");
  }
  try {
    from_json(nlohmann::json::parse(R"({"sim": {"beta": "two"}})"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field, "sim.beta");
  }
  try {
    from_json(nlohmann::json::parse(R"({"measure": {"atoms": [{"location": 0, "mass": 1}]}})"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field, "measure.atoms[0].mass");
  }
}

TEST(Config, FlagParsers) {
  const Grid g = parse_grid("-3:3:601");
  EXPECT_EQ(g.x_min, -3.0);
  EXPECT_EQ(g.x_max, 3.0);
  EXPECT_EQ(g.n, 601u);
  EXPECT_THROW(parse_grid("1:2"), ValidationError);
  EXPECT_THROW(parse_grid("1:2:2.5"), ValidationError);
  EXPECT_EQ(parse_list("0.25, 0.5,1", "--times"), (std::vector<double>{0.25, 0.5, 1.0}));
  EXPECT_TRUE(parse_list("", "--times").empty());
  EXPECT_EQ(MeasureSpec::parse("two_source:a=2.5").a, 2.5);
  EXPECT_EQ(MeasureSpec::parse("two_source").a, 1.0);
  EXPECT_EQ(MeasureSpec::parse("atoms:x.csv").atoms_file, "x.csv");
  EXPECT_THROW(MeasureSpec::parse("three_source"), ValidationError);
  EXPECT_THROW(MeasureSpec::parse("two_source:a=-1"), ValidationError);
}

TEST(Config, AtomsFile) {
  const fs::path dir = scratch("atoms");
  fs::create_directories(dir);
  std::ofstream(dir / "w.csv") << "location,weight\n2,0.75\n-1,0.25\n";
  std::ofstream(dir / "u.csv") << "0\n1\n3\n";
  const auto w = MeasureSpec::load_atoms((dir / "w.csv").string());
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].location, -1.0);
  EXPECT_EQ(w[0].weight, 0.25);
  const auto u = MeasureSpec::load_atoms((dir / "u.csv").string());
  EXPECT_DOUBLE_EQ(u[2].weight, 1.0 / 3.0);
}

TEST(Commands, InitialStateUsesLargestRemainder) {
  const auto s = initial_state(AtomicMeasure({{0.0, 1.0 / 3.0}, {1.0, 2.0 / 3.0}}), 10);
  ASSERT_EQ(s.size(), 10u);
  EXPECT_EQ(std::count(s.positions.begin(), s.positions.end(), 0.0), 3);
  EXPECT_EQ(std::count(s.positions.begin(), s.positions.end(), 1.0), 7);
  EXPECT_EQ(initial_state(AtomicMeasure::two_source(1.0), 7).size(), 7u);
}

TEST(Commands, DensityWritesProfilesAndEchoesConfig) {
  RunConfig c;
  c.output_dir = scratch("density").string();
  c.measure = MeasureSpec::parse("two_source:a=1");
  c.times = {0.25, 0.5, 1.0, 1.5, 2.0};
  c.grid = {-4.0, 4.0, 801};
  std::ostringstream log;
  cmd_density(c, log);
  for (const char* f : {"config.json", "density_t0.25.csv", "density_t2.csv", "summary.json"})
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
  EXPECT_EQ(dump(load_config(fs::path(c.output_dir) / "config.json")), dump(c));
  const auto rows = read_csv(fs::path(c.output_dir) / "density_t0.5.csv");
  ASSERT_EQ(rows.size(), 802u);
  EXPECT_EQ(rows[0][0], "x");
  double mass = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) mass += parse_double(rows[k][1], "rho") * 0.01;
  EXPECT_NEAR(mass, 1.0, 2e-3);
}

TEST(Commands, EmptyTimesIsNoOp) {
  RunConfig c;
  c.output_dir = scratch("empty").string();
  std::ostringstream log;
  cmd_density(c, log);
  EXPECT_NE(log.str().find("warning"), std::string::npos);
}

TEST(Commands, GeneralAtomsDensityHasUnitMass) {
  RunConfig c;
  c.output_dir = scratch("atoms_density").string();
  c.measure.kind = "atoms";
  c.measure.atoms = {{-1.5, 0.2}, {0.3, 0.5}, {2.0, 0.3}};
  c.times = {0.4};
  c.grid = {-4.0, 4.5, 851};
  std::ostringstream log;
  cmd_density(c, log);
  const auto rows = read_csv(fs::path(c.output_dir) / "density_t0.4.csv");
  double mass = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) mass += parse_double(rows[k][1], "rho") * 0.01;
  EXPECT_NEAR(mass, 1.0, 5e-3);
}

TEST(Commands, SupportContainsMergePoint) {
  RunConfig c;
  c.output_dir = scratch("support").string();
  c.measure = MeasureSpec::parse("two_source:a=1");
  c.support = {0.0, 2.0, 21, {}};
  std::ostringstream log;
  cmd_support(c, log);
  bool merge = false;
  for (const auto& r : read_csv(fs::path(c.output_dir) / "support_edges.csv"))
    if (r[0] == "1" && r[2] == "0") merge = true;
  EXPECT_TRUE(merge);
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "breakdown.csv"));
  EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / "characteristics.csv"));

  c.measure = MeasureSpec{};
  c.support = {1.0, 1.0, 1, {}};
  cmd_support(c, log);
  const auto rows = read_csv(fs::path(c.output_dir) / "support_edges.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (std::vector<std::string>{"1", "0", "-2"}));
  EXPECT_EQ(rows[2], (std::vector<std::string>{"1", "1", "2"}));
}

TEST(Commands, SimulateIsByteReproducible) {
  RunConfig c;
  c.sim = {60, 2.0, 1e-3, 5, 0.2};
  c.sample_times = {0.1, 0.2};
  c.output_dir = scratch("sim_a").string();
  std::ostringstream log;
  const auto summary = cmd_simulate(c, log);
  EXPECT_TRUE(summary["samples"][1].contains("ks"));
  const std::string first = slurp(fs::path(c.output_dir) / "trajectory.csv");
  c.output_dir = scratch("sim_b").string();
  cmd_simulate(c, log);
  EXPECT_EQ(slurp(fs::path(c.output_dir) / "trajectory.csv"), first);
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 121);
}

TEST(Commands, CompareReportsKsAndSupNorm) {
  RunConfig c;
  c.measure = MeasureSpec::parse("two_source:a=1");
  c.sim = {400, 2.0, 1e-3, 2, 1.5};
  c.output_dir = scratch("compare").string();
  std::ostringstream log;
  const auto s = cmd_compare(c, log);
  EXPECT_LT(s["samples"][0]["ks"].get<double>(), 0.06);
  EXPECT_GT(s["samples"][0]["sup_norm"].get<double>(), 0.0);
  c.measure.kind = "atoms";
  c.measure.atoms = {{0.0, 1.0}};
  EXPECT_THROW(cmd_compare(c, log), ValidationError);
}

TEST(Verify, SuiteSelection) {
  EXPECT_EQ(select_checks("plemelj").size(), 1u);
  EXPECT_EQ(select_checks("hilbert").size(), 5u);
  for (const auto& c : select_checks("default")) EXPECT_NE(c.group, "particles");
  EXPECT_EQ(select_checks("all").size(), all_checks().size());
  EXPECT_THROW(select_checks("nope"), ValidationError);
}

TEST(Verify, DefaultSuitePassesAndMutationsAreCaught) {
  RunConfig c;
  std::ostringstream log;
  const auto ok = cmd_verify(c, log);
  EXPECT_TRUE(ok["passed"].get<bool>()) << log.str();

  c.mutation = "hilbert_sign";
  c.suite = "hilbert";
  const auto flipped = cmd_verify(c, log);
  EXPECT_FALSE(flipped["passed"].get<bool>());
  const auto& fails = flipped["failures"];
  EXPECT_NE(std::find(fails.begin(), fails.end(), "hilbert_vs_pv"), fails.end());

  c.mutation = "one_source_branch";
  c.suite = "one_source_density";
  EXPECT_FALSE(cmd_verify(c, log)["passed"].get<bool>());
  c.mutation = "bogus";
  EXPECT_THROW(cmd_verify(c, log), ValidationError);
}

TEST(Tool, ExitCodesSeparateVerificationFromValidation) {
  const fs::path dir = scratch("tool");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"sim": {"beta": 0.5}})";
  EXPECT_EQ(run_tool("verify --suite plemelj"), 0);
  EXPECT_EQ(run_tool("verify --suite hilbert_vs_pv --mutation hilbert_sign"), 1);
  EXPECT_EQ(run_tool("simulate --config " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_tool("density --grid 1:2"), 2);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  EXPECT_EQ(run_tool("support --measure one_source --t-range 0:1:3 --output " + (dir / "s").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "s" / "config.json"));
}
