#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "scoredyn/errors.hpp"
#include "scoredyn_cli/config.hpp"
#include "scoredyn_cli/measure_io.hpp"
#include "scoredyn_cli/runner.hpp"

using namespace scoredyn;
using namespace scoredyn::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scoredyn_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig dirac_flow() {
  return from_json(json::parse(R"({
    "experiment": "flow",
    "model": {"d": 2, "alpha": 1.0, "sigma_eps": 0.01, "sigma_T": 1.0},
    "measure": {"points": [[0.5, -0.25]]},
    "params": {"x0": [2.0, 1.0], "t_end": 10000.0}
  })"));
}

}  // namespace

TEST(MeasureCsv, HeaderAndWeights) {
  std::istringstream in("x,y,weight\n# comment\n0,0,1\n\n1,2,3\n");
  const EmpiricalMeasure m = read_measure_csv(in);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.dimension(), 2);
  EXPECT_DOUBLE_EQ(m.weight(1), 0.75);
}

TEST(MeasureCsv, ExpectedDimensionDetectsWeightColumn) {
  std::istringstream in("0,1\n2,3\n");
  const EmpiricalMeasure m = read_measure_csv(in, 1);
  EXPECT_EQ(m.dimension(), 1);
  EXPECT_DOUBLE_EQ(m.weight(0), 1.0 / 4.0);
  std::istringstream plain("0,1\n2,3\n");
  EXPECT_EQ(read_measure_csv(plain).dimension(), 2);
}

TEST(MeasureCsv, Errors) {
  std::istringstream ragged("0,1\n2\n");
  try {
    read_measure_csv(ragged, 0, "pts.csv");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("pts.csv:2"), std::string::npos);
  }
  std::istringstream junk("1,2\n3,abc\n");
  EXPECT_THROW(read_measure_csv(junk), ParseError);
  std::istringstream negative("1,-1\n2,1\n");
  EXPECT_THROW(read_measure_csv(negative, 1), InvalidArgs);
  std::istringstream empty("x,y\n");
  EXPECT_THROW(read_measure_csv(empty), ParseError);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = dirac_flow();
  c.perturbation.kind = "linear";
  c.perturbation.matrix = {{0.1, 0.2}, {0.3, 0.4}};
  c.params.radius_factors = {5.0, 50.0};
  c.seed = 99;
  const ExperimentConfig back = from_json(to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, Rejections) {
  json j = to_json(dirac_flow());
  j["params"]["bogus"] = 1;
  EXPECT_THROW(from_json(j), InvalidArgs);
  j = to_json(dirac_flow());
  j["experiment"] = "equilibria";
  j["model"]["alpha"] = -2.0;
  EXPECT_THROW(from_json(j), InvalidArgs);
  j["model"]["alpha"] = 1.0;
  j["params"]["k"] = 1.2;
  EXPECT_THROW(from_json(j), InvalidArgs);
  j = to_json(dirac_flow());
  j["model"]["sigma_eps"] = 2.0;
  EXPECT_THROW(from_json(j), InvalidArgs);
  j = to_json(dirac_flow());
  j["params"]["n_t"] = -5;
  EXPECT_THROW(from_json(j), InvalidArgs);
  const fs::path dir = scratch("bad_json");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << "{ not json";
  EXPECT_THROW(load_config((dir / "c.json").string()), ParseError);
}

TEST(Config, CsvMeasureResolvesAgainstConfigDirectory) {
  const fs::path dir = scratch("csv_measure");
  fs::create_directories(dir);
  std::ofstream(dir / "pts.csv") << "0,0\n1,1\n";
  json j = to_json(dirac_flow());
  j["measure"] = {{"csv", "pts.csv"}};
  std::ofstream(dir / "c.json") << j.dump();
  const ExperimentConfig c = load_config((dir / "c.json").string());
  EXPECT_EQ(make_measure(c).size(), 2u);
}

TEST(Describe, ReportsKBound) {
  ExperimentConfig c = dirac_flow();
  const std::string text = describe(c);
  EXPECT_NE(text.find("k bound         1.0540925533894598"), std::string::npos) << text;
  EXPECT_NE(text.find("sigma ladder"), std::string::npos);
}

TEST(Run, DiracFlowConverges) {
  const fs::path dir = scratch("dirac_flow");
  std::ostringstream log;
  const RunResult r = run(dirac_flow(), RunOptions{dir.string(), {}, 1}, log);
  EXPECT_EQ(r.exit_code(), exit_ok);
  const std::string csv = slurp(dir / "flow.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_1,x_2,L,grad_norm,speed");
  const std::string last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  std::vector<double> cols;
  std::stringstream ss(last);
  for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(std::stod(cell));
  ASSERT_EQ(cols.size(), 6u);
  EXPECT_LE(cols[4], 1e-6);
  EXPECT_NEAR(cols[1], 0.5, 1e-6);
  EXPECT_NE(log.str().find("lyapunov_nondecreasing"), std::string::npos);
}

TEST(Run, LossCheckReport) {
  ExperimentConfig c = from_json(json::parse(R"({
    "experiment": "loss-check",
    "model": {"d": 1, "alpha": 1.0, "sigma_eps": 0.1, "sigma_T": 2.0},
    "measure": {"points": [[-1.0], [0.2], [1.5]], "weights": [0.3, 0.5, 0.2]},
    "perturbation": {"kind": "constant", "vector": [0.5]},
    "params": {"n_t": 5000, "grid_nodes": 801},
    "seed": 3
  })"));
  const fs::path dir = scratch("loss_check");
  std::ostringstream log;
  const RunResult r = run(c, RunOptions{dir.string(), {}, 1}, log);
  const json report = json::parse(slurp(dir / "loss-check.json"));
  for (const char* key : {"delta_mc", "delta_l2", "combined_stderr", "pass", "samples"})
    EXPECT_TRUE(report.contains(key)) << key;
  EXPECT_EQ(report["samples"].get<std::size_t>(), 5000u);
  EXPECT_EQ(report["pass"].get<bool>(), r.exit_code() == exit_ok);
}

TEST(Run, ByteIdenticalReruns) {
  ExperimentConfig c = from_json(json::parse(R"({
    "experiment": "langevin",
    "model": {"d": 2, "alpha": 1.0, "sigma_eps": 0.05, "sigma_T": 2.0},
    "measure": {"points": [[0, 0], [1, 0], [0.3, 1.1]]},
    "params": {"levels": 4, "steps_per_level": 50},
    "seed": 11
  })"));
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  std::ostringstream log;
  const RunResult ra = run(c, RunOptions{a.string(), {}, 1}, log);
  const RunResult rb = run(c, RunOptions{b.string(), {}, 4}, log);
  ASSERT_EQ(ra.artifacts.size(), rb.artifacts.size());
  for (std::size_t i = 0; i < ra.artifacts.size(); ++i)
    EXPECT_EQ(slurp(ra.artifacts[i]), slurp(rb.artifacts[i])) << ra.artifacts[i];
  const fs::path other = scratch("rerun_seed");
  const RunResult rc = run(c, RunOptions{other.string(), 12, 1}, log);
  EXPECT_NE(slurp(rc.artifacts[0]), slurp(ra.artifacts[0]));
}

TEST(Run, ExitCodes) {
  RunResult r;
  EXPECT_EQ(r.exit_code(), exit_ok);
  r.certificates.push_back({"x", false, -1.0});
  EXPECT_EQ(r.exit_code(), exit_certificate_failure);
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
}
