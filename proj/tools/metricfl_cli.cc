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

// metricfl: experiment runner and diagnostics.
//
//   metricfl run --config PATH --out DIR [--jobs N]
//   metricfl verify-mechanism --dim N --epsilon E --samples S --seed K --out DIR
//   metricfl make-fixture --providers P --services V --clusters C --seed K --out FILE
//
// Exit codes: 0 success, 1 config/usage error, 2 runtime error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metricfl/metricfl.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int Run(const std::string& config_path, const std::string& out_dir,
        std::size_t jobs) {
  metricfl::ExperimentConfig config;
  try {
    config = metricfl::LoadExperimentConfig(config_path);
  } catch (const metricfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  const metricfl::SweepSummary summary = metricfl::RunSweep(config, out_dir, jobs);
  std::cout << "completed " << summary.runs.size() << " runs; results in "
            << (std::filesystem::path(out_dir) / config.name).string() << "\n";
  for (const metricfl::CellResult& r : summary.runs) {
    std::cout << "  " << r.cell.DirName() << ": rounds=" << r.rounds
              << " validation_loss=" << metricfl::FormatDouble(r.final_validation_loss)
              << " max_leakage=" << metricfl::FormatDouble(r.privacy.max) << "\n";
  }
  return kExitOk;
}

int VerifyMechanism(std::size_t dim, double epsilon, std::size_t samples,
                    std::uint64_t seed, const std::string& out_dir) {
  const metricfl::MechanismReport report =
      metricfl::VerifyMechanism(dim, epsilon, samples, seed);
  metricfl::WriteReportTable(std::cout, report);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path path =
        std::filesystem::path(out_dir) / "mechanism_report.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    metricfl::WriteReportCsv(out, report);
    std::cout << "wrote " << path.string() << "\n";
  } else {
    metricfl::WriteReportCsv(std::cout, report);
  }
  return kExitOk;
}

int MakeFixture(const metricfl::FixtureOptions& options, const std::string& path) {
  const metricfl::Fixture fixture = metricfl::MakeHospitalFixture(options);
  const std::filesystem::path out_path(path);
  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  metricfl::WriteTabularCsv(out, fixture.rows);
  if (!out) throw std::runtime_error("write failed: " + path);
  std::cout << "wrote " << fixture.rows.size() << " rows to " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personalized federated learning under metric privacy"};
  app.require_subcommand(1);

  std::string config_path, run_out;
  std::size_t jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run an experiment sweep from a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Sweep cells to run in parallel")
      ->check(CLI::PositiveNumber);

  std::size_t dim = 2, samples = 100000;
  double epsilon = 1.0;
  std::uint64_t verify_seed = 0;
  std::string verify_out;
  CLI::App* verify = app.add_subcommand(
      "verify-mechanism", "Compare sampled noise moments with their closed forms");
  verify->add_option("--dim", dim, "Dimension n")->check(CLI::PositiveNumber);
  verify->add_option("--epsilon", epsilon, "Privacy parameter epsilon")
      ->check(CLI::PositiveNumber);
  verify->add_option("--samples", samples, "Number of draws")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  verify->add_option("--seed", verify_seed, "Random seed");
  verify->add_option("--out", verify_out,
                     "Directory for mechanism_report.csv (stdout if omitted)");

  metricfl::FixtureOptions fixture;
  std::string fixture_out;
  CLI::App* make_fixture =
      app.add_subcommand("make-fixture", "Write a hospital-like CSV");
  make_fixture->add_option("--providers", fixture.providers, "Provider count")
      ->check(CLI::PositiveNumber);
  make_fixture->add_option("--services", fixture.services, "Services per provider")
      ->check(CLI::PositiveNumber);
  make_fixture->add_option("--clusters", fixture.clusters, "Latent cost regions")
      ->check(CLI::PositiveNumber);
  make_fixture->add_option("--offsets", fixture.cost_offsets,
                           "Per-cluster cost offsets (payment units)")
      ->delimiter(',');
  make_fixture->add_option("--seed", fixture.seed, "Random seed");
  make_fixture->add_option("--out", fixture_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return Run(config_path, run_out, jobs);
    if (*verify) return VerifyMechanism(dim, epsilon, samples, verify_seed, verify_out);
    if (*make_fixture) return MakeFixture(fixture, fixture_out);
  } catch (const metricfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
