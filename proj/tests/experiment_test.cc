// Copyright 2026 The metricfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "metricfl/experiment.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "json.hpp"
#include "metricfl/csv.hpp"
#include "metricfl/data.hpp"

namespace metricfl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path FreshDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("metricfl_experiment_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> ReadCsv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(Slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    for (std::string_view f : SplitFields(line)) fields.emplace_back(f);
    rows.push_back(fields);
  }
  return rows;
}

json SmallSynthetic() {
  return json::parse(R"({
    "experiment": "synthetic",
    "name": "small",
    "federation": {"T": 15, "U": 5, "validation_patience": 0},
    "data": {"seed": 3, "synthetic": {"clients": 20, "validation_clients": 6}},
    "sweep": {"nu": [0, 5], "k": [1, 2], "seeds": [0, 1, 2]}
  })");
}

std::string ConfigErrorField(const json& j, const fs::path& base = {}) {
  try {
    ParseExperimentConfig(j, base);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

TEST(ConfigTest, Defaults) {
  const ExperimentConfig c = ParseExperimentConfig(json::object());
  EXPECT_EQ(c.kind, ExperimentKind::kSynthetic);
  EXPECT_EQ(c.name, "synthetic");
  EXPECT_EQ(c.federation.k, 2u);
  EXPECT_EQ(c.federation.rounds, 100u);
  EXPECT_EQ(c.federation.users_per_round, 7u);
  EXPECT_EQ(c.federation.local_epochs, 1u);
  EXPECT_DOUBLE_EQ(c.federation.step_size, 0.1);
  EXPECT_EQ(c.federation.batch_size, 10u);
  EXPECT_DOUBLE_EQ(c.federation.noise_multiplier, 5.0);
  EXPECT_EQ(c.federation.validation_patience, 6u);
  EXPECT_EQ(c.model.ParameterCount(), 2u);
  EXPECT_EQ(c.synthetic.clients, 100u);
  EXPECT_EQ(c.sweep_nu, std::vector<double>{5.0});
  EXPECT_EQ(c.sweep_k, std::vector<std::size_t>{2});
}

TEST(ConfigTest, ErrorsNameTheField) {
  json j = SmallSynthetic();
  j["federation"]["nue"] = 1;
  EXPECT_EQ(ConfigErrorField(j), "config.federation.nue");

  j = SmallSynthetic();
  j["federation"]["U"] = -3;
  EXPECT_EQ(ConfigErrorField(j), "config.federation.U");

  j = SmallSynthetic();
  j["federation"]["s"] = "fast";
  EXPECT_EQ(ConfigErrorField(j), "config.federation.s");

  j = SmallSynthetic();
  j["sweep"]["nu"] = json::array();
  EXPECT_EQ(ConfigErrorField(j), "config.sweep.nu");

  j = SmallSynthetic();
  j["sweep"]["seeds"] = {1, 1};
  EXPECT_EQ(ConfigErrorField(j), "config.sweep.seeds");

  j = SmallSynthetic();
  j["experiment"] = "femnist";
  EXPECT_EQ(ConfigErrorField(j), "config.experiment");

  j = SmallSynthetic();
  j["model"] = {{"kind", "mlp"}, {"input_dim", 3}, {"hidden", {2}}};
  EXPECT_EQ(ConfigErrorField(j), "config.data.synthetic.thetas");

  j = SmallSynthetic();
  j["federation"]["objective"] = "hinge";
  EXPECT_EQ(ConfigErrorField(j), "config.federation.objective");

  const json tabular = {{"experiment", "tabular"},
                        {"model", {{"kind", "mlp"}, {"input_dim", 3}, {"hidden", {2}}}},
                        {"data", {{"tabular", {{"path", "/no/such/file.csv"}}}}}};
  EXPECT_EQ(ConfigErrorField(tabular), "config.data.tabular.path");
}

TEST(ConfigTest, TabularRelativePathAndInputDim) {
  const fs::path dir = FreshDir("tabular_config");
  FixtureOptions options;
  options.providers = 10;
  std::ofstream(dir / "fixture.csv") << [&] {
    std::ostringstream out;
    WriteTabularCsv(out, MakeHospitalFixture(options).rows);
    return out.str();
  }();
  json j = {{"experiment", "tabular"},
            {"model", {{"kind", "mlp"}, {"input_dim", 3}, {"hidden", {2}}}},
            {"data", {{"tabular", {{"path", "fixture.csv"}}}}}};
  const ExperimentConfig c = ParseExperimentConfig(j, dir);
  EXPECT_EQ(c.tabular.path, fs::absolute(dir / "fixture.csv").lexically_normal());
  EXPECT_EQ(c.model.ParameterCount(), 11u);
  j["model"]["input_dim"] = 2;
  EXPECT_EQ(ConfigErrorField(j, dir), "config.model.input_dim");
}

TEST(ConfigTest, JsonRoundTrip) {
  const ExperimentConfig c = ParseExperimentConfig(SmallSynthetic());
  const ExperimentConfig again = ParseExperimentConfig(ToJson(c));
  EXPECT_EQ(ToJson(again), ToJson(c));
}

TEST(SweepTest, DirectoriesSummaryAndLedger) {
  const fs::path out = FreshDir("sweep");
  const ExperimentConfig c = ParseExperimentConfig(SmallSynthetic());
  const SweepSummary summary = RunSweep(c, out, 4);
  EXPECT_EQ(summary.runs.size(), 12u);

  std::size_t dirs = 0;
  for (const auto& entry : fs::directory_iterator(out / "small")) {
    if (!entry.is_directory()) continue;
    ++dirs;
    for (const char* file :
         {"config.json", "metrics.csv", "ledger.csv", "hypotheses.txt"}) {
      EXPECT_TRUE(fs::exists(entry.path() / file)) << entry.path() << " " << file;
    }
  }
  EXPECT_EQ(dirs, 12u);
  EXPECT_TRUE(fs::exists(out / "small" / "5_2_1"));

  const auto rows = ReadCsv(out / "small" / "summary.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][0], "nu");
  EXPECT_EQ(rows[1][0], "0");
  EXPECT_EQ(rows[1][2], "3");

  // nu = 5 on a linear model with n = 2: every release costs 0.4.
  for (const char* dir : {"5_1_0", "5_2_0", "5_2_2"}) {
    const auto ledger = ReadCsv(out / "small" / dir / "ledger.csv");
    ASSERT_GT(ledger.size(), 1u);
    EXPECT_EQ(ledger[0][5], "leakage");
    std::map<std::string, int> count;
    for (std::size_t i = 1; i < ledger.size(); ++i) {
      EXPECT_EQ(ledger[i][5], "0.4");
      const int n = ++count[ledger[i][0]];
      EXPECT_NEAR(*ParseDouble(ledger[i][6]), 0.4 * n, 1e-12);
    }
  }
  const auto unsanitized = ReadCsv(out / "small" / "0_2_0" / "ledger.csv");
  EXPECT_EQ(unsanitized[1][5], "inf");

  const auto privacy = ReadCsv(out / "small" / "privacy_summary.csv");
  ASSERT_EQ(privacy.size(), 5u);
  EXPECT_EQ(privacy[0], (std::vector<std::string>{"noise_multiplier", "hypotheses",
                                                  "median_budget", "max_budget"}));
}

TEST(SweepTest, RerunIsByteIdentical) {
  const ExperimentConfig c = ParseExperimentConfig(SmallSynthetic());
  const fs::path a = FreshDir("rerun_a"), b = FreshDir("rerun_b");
  RunSweep(c, a, 1);
  RunSweep(c, b, 3);
  for (const SweepCell& cell : SweepCells(c)) {
    for (const char* file : {"metrics.csv", "ledger.csv", "hypotheses.txt", "config.json"}) {
      EXPECT_EQ(Slurp(a / "small" / cell.DirName() / file),
                Slurp(b / "small" / cell.DirName() / file))
          << cell.DirName() << "/" << file;
    }
  }
  EXPECT_EQ(Slurp(a / "small" / "summary.csv"), Slurp(b / "small" / "summary.csv"));
}

TEST(SweepTest, EchoedConfigReproducesRun) {
  const ExperimentConfig c = ParseExperimentConfig(SmallSynthetic());
  const fs::path a = FreshDir("echo_a"), b = FreshDir("echo_b");
  RunSweep(c, a);
  const fs::path cell = a / "small" / "5_2_1";
  const ExperimentConfig echoed = LoadExperimentConfig(cell / "config.json");
  ASSERT_EQ(SweepCells(echoed).size(), 1u);
  RunSweep(echoed, b);
  for (const char* file : {"metrics.csv", "ledger.csv", "hypotheses.txt"}) {
    EXPECT_EQ(Slurp(cell / file), Slurp(b / "small" / "5_2_1" / file)) << file;
  }
}

TEST(SweepTest, RuntimeErrorsNameTheRun) {
  json j = SmallSynthetic();
  j["federation"]["U"] = 50;  // more than the 20 training clients
  const ExperimentConfig c = ParseExperimentConfig(j);
  try {
    RunSweep(c, FreshDir("runtime_error"));
    FAIL() << "expected RunError";
  } catch (const RunError& e) {
    EXPECT_NE(std::string(e.what()).find("run 0_1_0"), std::string::npos) << e.what();
  }
}

TEST(SweepTest, TabularFixtureRuns) {
  const fs::path dir = FreshDir("tabular_run");
  FixtureOptions options;
  options.providers = 30;
  options.seed = 4;
  {
    std::ofstream out(dir / "fixture.csv", std::ios::binary);
    WriteTabularCsv(out, MakeHospitalFixture(options).rows);
  }
  const json j = {{"experiment", "tabular"},
                  {"name", "hospital"},
                  {"federation", {{"T", 10}, {"U", 5}}},
                  {"model", {{"kind", "mlp"}, {"input_dim", 3}, {"hidden", {2}}}},
                  {"data", {{"tabular", {{"path", (dir / "fixture.csv").string()}}}}},
                  {"sweep", {{"nu", {1}}, {"k", {5}}, {"seeds", {0}}}}};
  const SweepSummary s = RunSweep(ParseExperimentConfig(j), dir / "out");
  ASSERT_EQ(s.runs.size(), 1u);
  // 11 parameters, nu = 1: each release costs 11.
  const auto ledger = ReadCsv(dir / "out" / "hospital" / "1_5_0" / "ledger.csv");
  EXPECT_EQ(ledger[1][5], "11");
}

// --- Command-line binary -------------------------------------------------

int RunCli(const std::string& args, const fs::path& log) {
  const std::string command =
      std::string(METRICFL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, double> ReportColumn(const fs::path& csv, std::size_t column) {
  std::map<std::string, double> out;
  const auto rows = ReadCsv(csv);
  for (std::size_t i = 1; i < rows.size(); ++i) out[rows[i][0]] = *ParseDouble(rows[i][column]);
  return out;
}

TEST(CliTest, VerifyMechanism) {
  const fs::path dir = FreshDir("cli_verify");
  ASSERT_EQ(RunCli("verify-mechanism --dim 2 --epsilon 1 --samples 100000 --seed 1 --out " +
                       (dir / "d2").string(),
                   dir / "log"),
            0);
  const auto d2 = ReportColumn(dir / "d2" / "mechanism_report.csv", 1);
  EXPECT_NEAR(d2.at("mean_radius"), 2.0, 0.02 * 2.0);

  ASSERT_EQ(RunCli("verify-mechanism --dim 1 --epsilon 1 --samples 100000 --seed 2 --out " +
                       (dir / "d1").string(),
                   dir / "log"),
            0);
  EXPECT_NEAR(ReportColumn(dir / "d1" / "mechanism_report.csv", 1).at("component_variance"),
              2.0, 0.05 * 2.0);

  ASSERT_EQ(RunCli("verify-mechanism --dim 11 --epsilon 1 --samples 100000 --seed 3 --out " +
                       (dir / "d11").string(),
                   dir / "log"),
            0);
  const auto d11 = ReportColumn(dir / "d11" / "mechanism_report.csv", 1);
  EXPECT_NEAR(d11.at("component_variance"), 12.0, 0.05 * 12.0);
  EXPECT_DOUBLE_EQ(ReportColumn(dir / "d11" / "mechanism_report.csv", 2).at("component_variance"),
                   12.0);
}

TEST(CliTest, MakeFixture) {
  const fs::path dir = FreshDir("cli_fixture");
  const std::string base = "make-fixture --providers 5 --services 4 --clusters 2 --seed 9 ";
  ASSERT_EQ(RunCli(base + "--out " + (dir / "a.csv").string(), dir / "log"), 0);
  ASSERT_EQ(RunCli(base + "--out " + (dir / "b.csv").string(), dir / "log"), 0);
  EXPECT_EQ(ReadCsv(dir / "a.csv").size(), 21u);
  EXPECT_EQ(Slurp(dir / "a.csv"), Slurp(dir / "b.csv"));

  ASSERT_EQ(RunCli("make-fixture --providers 100 --services 4 --clusters 2 --offsets 1,10 "
                   "--seed 1 --out " + (dir / "c.csv").string(),
                   dir / "log"),
            0);
  const std::vector<TabularRow> rows = ReadTabularCsv(dir / "c.csv");
  EXPECT_EQ(rows.size(), 400u);
}

TEST(CliTest, RunAndExitCodes) {
  const fs::path dir = FreshDir("cli_run");
  json j = SmallSynthetic();
  j["sweep"] = {{"nu", {5}}, {"k", {2}}, {"seeds", {0}}};
  std::ofstream(dir / "good.json") << j.dump();
  EXPECT_EQ(RunCli("run --config " + (dir / "good.json").string() + " --out " +
                       (dir / "out").string(),
                   dir / "log"),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "small" / "5_2_0" / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "small" / "summary.csv"));

  j["federation"]["bogus"] = 1;
  std::ofstream(dir / "bad.json") << j.dump();
  EXPECT_EQ(RunCli("run --config " + (dir / "bad.json").string() + " --out " +
                       (dir / "out2").string(),
                   dir / "log"),
            1);
  EXPECT_NE(Slurp(dir / "log").find("config.federation.bogus"), std::string::npos);

  std::ofstream(dir / "broken.json") << "{ \"federation\": ";
  EXPECT_EQ(RunCli("run --config " + (dir / "broken.json").string() + " --out " +
                       (dir / "out3").string(),
                   dir / "log"),
            1);

  j.erase("federation");
  j["federation"] = {{"U", 50}};
  std::ofstream(dir / "runtime.json") << j.dump();
  EXPECT_EQ(RunCli("run --config " + (dir / "runtime.json").string() + " --out " +
                       (dir / "out4").string(),
                   dir / "log"),
            2);

  EXPECT_EQ(RunCli("", dir / "log"), 1);
  EXPECT_EQ(RunCli("run --out x", dir / "log"), 1);
  EXPECT_EQ(RunCli("verify-mechanism --dim 0", dir / "log"), 1);
}

}  // namespace
}  // namespace metricfl
