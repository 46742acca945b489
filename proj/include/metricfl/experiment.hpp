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

// Experiment configuration (JSON) and the sweep runner behind `run`.
//
// Output layout:
//   <out>/<name>/<nu>_<k>_<seed>/{config.json, metrics.csv, ledger.csv,
//                                 hypotheses.txt, hypotheses_last.txt}
//   <out>/<name>/summary.csv          mean/std of final losses per (nu, k)
//   <out>/<name>/privacy_summary.csv  median/max composed leakage per (nu, k)

#ifndef METRICFL_EXPERIMENT_HPP_
#define METRICFL_EXPERIMENT_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "metricfl/accounting.hpp"
#include "metricfl/csv.hpp"
#include "metricfl/data.hpp"
#include "metricfl/federation.hpp"
#include "metricfl/models.hpp"

namespace metricfl {

enum class ExperimentKind { kSynthetic, kTabular };

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SyntheticDataConfig {
  std::size_t clients = 100;
  std::size_t samples_per_client = 10;
  std::size_t validation_clients = 30;
  std::vector<std::vector<double>> thetas = {{5.0, 6.0}, {4.0, -4.5}};
  double noise_upper = 1.0;
};

struct TabularDataConfig {
  std::filesystem::path path;
  TabularScaling scaling{1.0, 100.0, 100.0, 1000.0};
  std::vector<double> service_allowlist;
  double validation_fraction = 0.3;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSynthetic;
  std::string name;
  FederationConfig federation;
  ModelSpec model = ModelSpec::Linear(2);
  std::uint64_t data_seed = 0;
  SyntheticDataConfig synthetic;
  TabularDataConfig tabular;
  std::vector<double> sweep_nu;
  std::vector<std::size_t> sweep_k;
  std::vector<std::uint64_t> sweep_seeds;
};

namespace internal {

using Json = nlohmann::json;

inline void CheckKeys(const Json& object, const std::string& path,
                      std::initializer_list<const char*> allowed) {
  if (!object.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, unused] : object.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(path + "." + key, "unknown field");
  }
}

template <typename T>
T Get(const Json& object, const char* key, const std::string& path, T fallback) {
  if (!object.contains(key) || object.at(key).is_null()) return fallback;
  try {
    const Json& v = object.at(key);
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(path + "." + key, "expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    }
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + "." + key, e.what());
  }
}

inline ModelSpec ParseModel(const Json& j, const std::string& path) {
  CheckKeys(j, path, {"kind", "input_dim", "hidden", "output_dim"});
  const std::string kind = Get<std::string>(j, "kind", path, "linear");
  ModelSpec spec;
  if (kind == "linear") {
    spec.kind = ModelKind::kLinear;
  } else if (kind == "mlp") {
    spec.kind = ModelKind::kMlp;
  } else {
    throw ConfigError(path + ".kind", "expected 'linear' or 'mlp', got '" + kind + "'");
  }
  spec.input_dim = Get<std::size_t>(j, "input_dim", path, 2);
  spec.output_dim = Get<std::size_t>(j, "output_dim", path, 1);
  spec.hidden = Get<std::vector<std::size_t>>(j, "hidden", path, {});
  try {
    spec.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return spec;
}

inline std::string ObjectiveName(Objective o) {
  return o == Objective::kRmse ? "rmse" : "cross_entropy";
}

}  // namespace internal

// Parses a config document. Relative data paths resolve against `base_dir`.
inline ExperimentConfig ParseExperimentConfig(
    const nlohmann::json& root, const std::filesystem::path& base_dir = {}) {
  using internal::Get;
  ExperimentConfig c;
  internal::CheckKeys(root, "config",
                      {"experiment", "name", "federation", "model", "data", "sweep"});
  const std::string kind = Get<std::string>(root, "experiment", "config", "synthetic");
  if (kind == "synthetic") {
    c.kind = ExperimentKind::kSynthetic;
  } else if (kind == "tabular") {
    c.kind = ExperimentKind::kTabular;
  } else {
    throw ConfigError("config.experiment",
                      "expected 'synthetic' or 'tabular', got '" + kind + "'");
  }
  c.name = Get<std::string>(root, "name", "config", kind);
  if (c.name.empty() || c.name.find('/') != std::string::npos) {
    throw ConfigError("config.name", "must be a nonempty single path component");
  }

  const nlohmann::json fed = root.value("federation", nlohmann::json::object());
  const std::string fp = "config.federation";
  internal::CheckKeys(fed, fp,
                      {"k", "T", "U", "E", "s", "B_s", "nu", "validation_patience",
                       "validation_every", "validation_sample", "budget_cap",
                       "objective", "master_seed", "kmeans_max_iters", "kmeans_tol"});
  FederationConfig& f = c.federation;
  f.k = Get<std::size_t>(fed, "k", fp, f.k);
  f.rounds = Get<std::size_t>(fed, "T", fp, f.rounds);
  f.users_per_round = Get<std::size_t>(fed, "U", fp, f.users_per_round);
  f.local_epochs = Get<std::size_t>(fed, "E", fp, f.local_epochs);
  f.step_size = Get<double>(fed, "s", fp, f.step_size);
  f.batch_size = Get<std::size_t>(fed, "B_s", fp, f.batch_size);
  f.noise_multiplier = Get<double>(fed, "nu", fp, f.noise_multiplier);
  f.validation_patience =
      Get<std::size_t>(fed, "validation_patience", fp, f.validation_patience);
  f.validation_every = Get<std::size_t>(fed, "validation_every", fp, f.validation_every);
  f.validation_sample =
      Get<std::size_t>(fed, "validation_sample", fp, f.validation_sample);
  if (fed.contains("budget_cap") && !fed.at("budget_cap").is_null()) {
    f.budget_cap = Get<double>(fed, "budget_cap", fp, 0.0);
  }
  const std::string objective = Get<std::string>(fed, "objective", fp, "rmse");
  if (objective == "rmse") {
    f.objective = Objective::kRmse;
  } else if (objective == "cross_entropy") {
    f.objective = Objective::kCrossEntropy;
  } else {
    throw ConfigError(fp + ".objective", "expected 'rmse' or 'cross_entropy'");
  }
  f.master_seed = Get<std::uint64_t>(fed, "master_seed", fp, f.master_seed);
  f.kmeans.max_iters = Get<std::size_t>(fed, "kmeans_max_iters", fp, f.kmeans.max_iters);
  f.kmeans.tol = Get<double>(fed, "kmeans_tol", fp, f.kmeans.tol);
  if (!(f.step_size > 0)) throw ConfigError(fp + ".s", "must be > 0");
  if (!(f.noise_multiplier >= 0)) throw ConfigError(fp + ".nu", "must be >= 0");
  if (f.k < 1) throw ConfigError(fp + ".k", "must be >= 1");
  if (f.users_per_round < 1) throw ConfigError(fp + ".U", "must be >= 1");
  if (f.batch_size < 1) throw ConfigError(fp + ".B_s", "must be >= 1");
  if (f.validation_every < 1) throw ConfigError(fp + ".validation_every", "must be >= 1");

  c.model = internal::ParseModel(root.value("model", nlohmann::json::object()),
                                 "config.model");

  const nlohmann::json data = root.value("data", nlohmann::json::object());
  internal::CheckKeys(data, "config.data", {"seed", "synthetic", "tabular"});
  c.data_seed = Get<std::uint64_t>(data, "seed", "config.data", 0);
  if (c.kind == ExperimentKind::kSynthetic) {
    const nlohmann::json s = data.value("synthetic", nlohmann::json::object());
    const std::string sp = "config.data.synthetic";
    internal::CheckKeys(s, sp, {"clients", "samples_per_client", "validation_clients",
                                "thetas", "noise_upper"});
    SyntheticDataConfig& sc = c.synthetic;
    sc.clients = Get<std::size_t>(s, "clients", sp, sc.clients);
    sc.samples_per_client =
        Get<std::size_t>(s, "samples_per_client", sp, sc.samples_per_client);
    sc.validation_clients =
        Get<std::size_t>(s, "validation_clients", sp, sc.validation_clients);
    sc.thetas = Get<std::vector<std::vector<double>>>(s, "thetas", sp, sc.thetas);
    sc.noise_upper = Get<double>(s, "noise_upper", sp, sc.noise_upper);
    if (sc.thetas.empty()) throw ConfigError(sp + ".thetas", "must be nonempty");
    for (const auto& t : sc.thetas) {
      if (t.size() != c.model.input_dim) {
        throw ConfigError(sp + ".thetas", "length must equal model.input_dim");
      }
    }
    if (sc.clients == 0) throw ConfigError(sp + ".clients", "must be >= 1");
    if (sc.samples_per_client == 0) {
      throw ConfigError(sp + ".samples_per_client", "must be >= 1");
    }
  } else {
    if (!data.contains("tabular")) {
      throw ConfigError("config.data.tabular", "required for tabular experiments");
    }
    const nlohmann::json& t = data.at("tabular");
    const std::string tp = "config.data.tabular";
    internal::CheckKeys(t, tp, {"path", "scaling", "service_allowlist",
                                "validation_fraction"});
    TabularDataConfig& tc = c.tabular;
    const std::string path = Get<std::string>(t, "path", tp, "");
    if (path.empty()) throw ConfigError(tp + ".path", "required");
    tc.path = std::filesystem::path(path);
    if (tc.path.is_relative() && !base_dir.empty()) tc.path = base_dir / tc.path;
    tc.path = std::filesystem::absolute(tc.path).lexically_normal();
    if (!std::filesystem::exists(tc.path)) {
      throw ConfigError(tp + ".path", "no such file: " + tc.path.string());
    }
    if (t.contains("scaling")) {
      const nlohmann::json& sc = t.at("scaling");
      const std::string scp = tp + ".scaling";
      internal::CheckKeys(sc, scp, {"service", "longitude", "latitude", "payment"});
      tc.scaling.service = Get<double>(sc, "service", scp, tc.scaling.service);
      tc.scaling.longitude = Get<double>(sc, "longitude", scp, tc.scaling.longitude);
      tc.scaling.latitude = Get<double>(sc, "latitude", scp, tc.scaling.latitude);
      tc.scaling.payment = Get<double>(sc, "payment", scp, tc.scaling.payment);
      for (double v : {tc.scaling.service, tc.scaling.longitude, tc.scaling.latitude,
                       tc.scaling.payment}) {
        if (!(v > 0)) throw ConfigError(scp, "scaling constants must be > 0");
      }
    }
    tc.service_allowlist =
        Get<std::vector<double>>(t, "service_allowlist", tp, tc.service_allowlist);
    tc.validation_fraction =
        Get<double>(t, "validation_fraction", tp, tc.validation_fraction);
    if (!(tc.validation_fraction > 0 && tc.validation_fraction < 1)) {
      throw ConfigError(tp + ".validation_fraction", "must be in (0, 1)");
    }
    if (c.model.input_dim != 3) {
      throw ConfigError("config.model.input_dim",
                        "tabular data has 3 features (service, longitude, latitude)");
    }
  }

  const nlohmann::json sweep = root.value("sweep", nlohmann::json::object());
  internal::CheckKeys(sweep, "config.sweep", {"nu", "k", "seeds"});
  c.sweep_nu = Get<std::vector<double>>(sweep, "nu", "config.sweep",
                                        {f.noise_multiplier});
  c.sweep_k = Get<std::vector<std::size_t>>(sweep, "k", "config.sweep", {f.k});
  c.sweep_seeds = Get<std::vector<std::uint64_t>>(sweep, "seeds", "config.sweep",
                                                  {f.master_seed});
  if (c.sweep_nu.empty()) throw ConfigError("config.sweep.nu", "must be nonempty");
  if (c.sweep_k.empty()) throw ConfigError("config.sweep.k", "must be nonempty");
  if (c.sweep_seeds.empty()) throw ConfigError("config.sweep.seeds", "must be nonempty");
  for (double nu : c.sweep_nu) {
    if (!(nu >= 0) || std::isinf(nu)) throw ConfigError("config.sweep.nu", "values must be >= 0");
  }
  for (std::size_t k : c.sweep_k) {
    if (k < 1) throw ConfigError("config.sweep.k", "values must be >= 1");
  }
  auto unique = [](auto values) {
    std::sort(values.begin(), values.end());
    return std::adjacent_find(values.begin(), values.end()) == values.end();
  };
  if (!unique(c.sweep_nu)) throw ConfigError("config.sweep.nu", "duplicate value");
  if (!unique(c.sweep_k)) throw ConfigError("config.sweep.k", "duplicate value");
  if (!unique(c.sweep_seeds)) throw ConfigError("config.sweep.seeds", "duplicate value");
  return c;
}

inline ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return ParseExperimentConfig(root, path.parent_path());
}

// Effective config with every default filled in.
inline nlohmann::json ToJson(const ExperimentConfig& c) {
  const FederationConfig& f = c.federation;
  nlohmann::json fed = {
      {"k", f.k},
      {"T", f.rounds},
      {"U", f.users_per_round},
      {"E", f.local_epochs},
      {"s", f.step_size},
      {"B_s", f.batch_size},
      {"nu", f.noise_multiplier},
      {"validation_patience", f.validation_patience},
      {"validation_every", f.validation_every},
      {"validation_sample", f.validation_sample},
      {"budget_cap", f.budget_cap ? nlohmann::json(*f.budget_cap) : nlohmann::json()},
      {"objective", internal::ObjectiveName(f.objective)},
      {"master_seed", f.master_seed},
      {"kmeans_max_iters", f.kmeans.max_iters},
      {"kmeans_tol", f.kmeans.tol},
  };
  nlohmann::json model = {
      {"kind", c.model.kind == ModelKind::kLinear ? "linear" : "mlp"},
      {"input_dim", c.model.input_dim},
      {"hidden", c.model.hidden},
      {"output_dim", c.model.output_dim},
  };
  nlohmann::json data = {{"seed", c.data_seed}};
  if (c.kind == ExperimentKind::kSynthetic) {
    data["synthetic"] = {
        {"clients", c.synthetic.clients},
        {"samples_per_client", c.synthetic.samples_per_client},
        {"validation_clients", c.synthetic.validation_clients},
        {"thetas", c.synthetic.thetas},
        {"noise_upper", c.synthetic.noise_upper},
    };
  } else {
    data["tabular"] = {
        {"path", c.tabular.path.string()},
        {"scaling",
         {{"service", c.tabular.scaling.service},
          {"longitude", c.tabular.scaling.longitude},
          {"latitude", c.tabular.scaling.latitude},
          {"payment", c.tabular.scaling.payment}}},
        {"service_allowlist", c.tabular.service_allowlist},
        {"validation_fraction", c.tabular.validation_fraction},
    };
  }
  return {
      {"experiment", c.kind == ExperimentKind::kSynthetic ? "synthetic" : "tabular"},
      {"name", c.name},
      {"federation", fed},
      {"model", model},
      {"data", data},
      {"sweep", {{"nu", c.sweep_nu}, {"k", c.sweep_k}, {"seeds", c.sweep_seeds}}},
  };
}

// Train and validation clients for an experiment. Depends only on the data
// section, so every sweep cell sees the same population.
struct ExperimentData {
  ClientPopulation train;
  ClientPopulation validation;
};

inline ExperimentData BuildExperimentData(const ExperimentConfig& c) {
  ExperimentData data;
  if (c.kind == ExperimentKind::kSynthetic) {
    SyntheticOptions options;
    options.clients = c.synthetic.clients;
    options.samples_per_client = c.synthetic.samples_per_client;
    options.noise_upper = c.synthetic.noise_upper;
    options.thetas.clear();
    for (const auto& t : c.synthetic.thetas) options.thetas.emplace_back(t);
    Rng train_rng(c.data_seed, StreamRole::kData, 0, 0);
    data.train = GenerateSynthetic(options, train_rng);
    if (c.synthetic.validation_clients > 0) {
      options.clients = c.synthetic.validation_clients;
      options.first_id = c.synthetic.clients;
      Rng validation_rng(c.data_seed, StreamRole::kData, 1, 0);
      data.validation = GenerateSynthetic(options, validation_rng);
    }
  } else {
    TabularOptions options{c.tabular.scaling, c.tabular.service_allowlist};
    const ClientPopulation population = IngestCsv(c.tabular.path, options);
    Rng split_rng(c.data_seed, StreamRole::kSplit, 0, 0);
    std::tie(data.train, data.validation) =
        SplitPopulation(population, c.tabular.validation_fraction, split_rng);
  }
  return data;
}

struct SweepCell {
  double nu = 0.0;
  std::size_t k = 1;
  std::uint64_t seed = 0;

  std::string DirName() const {
    return FormatDouble(nu) + "_" + std::to_string(k) + "_" + std::to_string(seed);
  }
};

struct CellResult {
  SweepCell cell;
  double final_validation_loss = std::numeric_limits<double>::quiet_NaN();
  double final_train_loss = std::numeric_limits<double>::quiet_NaN();
  std::size_t rounds = 0;
  LeakageStats privacy;
};

struct SweepSummary {
  std::vector<CellResult> runs;
};

class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<SweepCell> SweepCells(const ExperimentConfig& c) {
  std::vector<SweepCell> cells;
  for (double nu : c.sweep_nu) {
    for (std::size_t k : c.sweep_k) {
      for (std::uint64_t seed : c.sweep_seeds) cells.push_back({nu, k, seed});
    }
  }
  return cells;
}

// The single-cell config echoed into a run directory.
inline ExperimentConfig CellConfig(const ExperimentConfig& c, const SweepCell& cell) {
  ExperimentConfig out = c;
  out.federation.noise_multiplier = cell.nu;
  out.federation.k = cell.k;
  out.federation.master_seed = cell.seed;
  out.sweep_nu = {cell.nu};
  out.sweep_k = {cell.k};
  out.sweep_seeds = {cell.seed};
  return out;
}

namespace internal {

inline void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : s / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single value.
inline double StdDev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace internal

inline CellResult RunCell(const ExperimentConfig& c, const ExperimentData& data,
                          const SweepCell& cell, const std::filesystem::path& dir) {
  const ExperimentConfig cell_config = CellConfig(c, cell);
  const std::vector<FederatedClient> train = data.train.FederatedView();
  const std::vector<FederatedClient> validation = data.validation.FederatedView();
  ExperimentResult result =
      RunExperiment(train, validation, c.model, cell_config.federation);

  std::filesystem::create_directories(dir);
  internal::WriteFile(dir / "config.json", ToJson(cell_config).dump(2) + "\n");
  std::ostringstream metrics, ledger, best, last;
  WriteMetricsCsv(metrics, result, cell.k);
  result.ledger.WriteCsv(ledger);
  WriteHypotheses(best, result.best);
  WriteHypotheses(last, result.last);
  internal::WriteFile(dir / "metrics.csv", metrics.str());
  internal::WriteFile(dir / "ledger.csv", ledger.str());
  internal::WriteFile(dir / "hypotheses.txt", best.str());
  internal::WriteFile(dir / "hypotheses_last.txt", last.str());

  CellResult out;
  out.cell = cell;
  out.rounds = result.history.size();
  if (result.best_validation_loss) out.final_validation_loss = *result.best_validation_loss;
  for (auto it = result.history.rbegin(); it != result.history.rend(); ++it) {
    out.final_train_loss = it->mean_train_loss;
    break;
  }
  out.privacy = result.ledger.Summarize().overall;
  return out;
}

// Runs every (nu, k, seed) cell, `jobs` at a time, then writes the summaries.
inline SweepSummary RunSweep(const ExperimentConfig& c,
                             const std::filesystem::path& out_dir,
                             std::size_t jobs = 1) {
  const ExperimentData data = BuildExperimentData(c);
  for (const PopulationClient& client : data.train.clients) {
    CheckDimension("model.input_dim vs data features", c.model.input_dim,
                   client.data.features.cols);
  }
  const std::filesystem::path root = out_dir / c.name;
  std::filesystem::create_directories(root);

  const std::vector<SweepCell> cells = SweepCells(c);
  SweepSummary summary;
  summary.runs.resize(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        summary.runs[i] = RunCell(c, data, cells[i], root / cells[i].DirName());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RunError("run " + cells[i].DirName() + ": " + e.what());
    }
  }

  // Aggregate per (nu, k) in sweep order.
  std::ostringstream loss_csv, privacy_csv;
  loss_csv << "nu,k,runs,mean_validation_loss,std_validation_loss,"
              "mean_train_loss,std_train_loss,mean_rounds\n";
  privacy_csv << "noise_multiplier,hypotheses,median_budget,max_budget\n";
  for (double nu : c.sweep_nu) {
    for (std::size_t k : c.sweep_k) {
      std::vector<double> val, train, rounds, median, max;
      for (const CellResult& r : summary.runs) {
        if (r.cell.nu != nu || r.cell.k != k) continue;
        val.push_back(r.final_validation_loss);
        train.push_back(r.final_train_loss);
        rounds.push_back(static_cast<double>(r.rounds));
        median.push_back(r.privacy.median);
        max.push_back(r.privacy.max);
      }
      loss_csv << FormatDouble(nu) << ',' << k << ',' << val.size() << ','
               << FormatDouble(internal::Mean(val)) << ','
               << FormatDouble(internal::StdDev(val)) << ','
               << FormatDouble(internal::Mean(train)) << ','
               << FormatDouble(internal::StdDev(train)) << ','
               << FormatDouble(internal::Mean(rounds)) << '\n';
      privacy_csv << FormatDouble(nu) << ',' << k << ','
                  << FormatDouble(internal::Mean(median)) << ','
                  << FormatDouble(internal::Mean(max)) << '\n';
    }
  }
  internal::WriteFile(root / "summary.csv", loss_csv.str());
  internal::WriteFile(root / "privacy_summary.csv", privacy_csv.str());
  return summary;
}

}  // namespace metricfl

#endif  // METRICFL_EXPERIMENT_HPP_
