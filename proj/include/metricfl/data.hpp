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

#ifndef METRICFL_DATA_HPP_
#define METRICFL_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metricfl/csv.hpp"
#include "metricfl/models.hpp"
#include "metricfl/parameter_vector.hpp"
#include "metricfl/rng.hpp"

namespace metricfl {

// What the federation layer sees of a client: an id and its local samples.
struct FederatedClient {
  ClientId id = 0;
  Batch data;
};

struct PopulationClient {
  ClientId id = 0;
  // Source key (provider id for tabular data); empty for synthetic clients.
  std::string source_key;
  Batch data;
  // Generating cluster. Test/diagnostic use only; never handed to federation.
  int hidden_label = -1;
};

struct ClientPopulation {
  std::vector<PopulationClient> clients;
  std::string generator;

  std::size_t size() const { return clients.size(); }

  // Label-free view for the federation engine.
  std::vector<FederatedClient> FederatedView() const {
    std::vector<FederatedClient> view;
    view.reserve(clients.size());
    for (const PopulationClient& c : clients) view.push_back({c.id, c.data});
    return view;
  }
};

// ---------------------------------------------------------------------------
// Synthetic linear population.

struct SyntheticOptions {
  std::size_t clients = 100;
  std::size_t samples_per_client = 10;
  std::vector<ParameterVector> thetas = {ParameterVector{5.0, 6.0},
                                         ParameterVector{4.0, -4.5}};
  // Additive target noise u ~ Uniform[0, noise_upper).
  double noise_upper = 1.0;
  ClientId first_id = 0;
};

// Clients are split evenly across `thetas` (shuffled); features are i.i.d.
// standard normal and targets are y = x^T theta* + u.
inline ClientPopulation GenerateSynthetic(const SyntheticOptions& options,
                                          Rng& rng) {
  if (options.thetas.empty()) {
    throw std::invalid_argument("GenerateSynthetic: no generating parameters");
  }
  if (options.samples_per_client == 0) {
    throw std::invalid_argument("GenerateSynthetic: samples_per_client must be >= 1");
  }
  const std::size_t dim = options.thetas[0].dimension();
  for (const ParameterVector& t : options.thetas) {
    CheckDimension("GenerateSynthetic(theta)", dim, t.dimension());
  }
  std::vector<int> labels(options.clients);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    labels[c] = static_cast<int>(c % options.thetas.size());
  }
  rng.Shuffle(labels);

  ClientPopulation population;
  population.generator = "synthetic";
  for (std::size_t c = 0; c < options.clients; ++c) {
    const ParameterVector& theta = options.thetas[labels[c]];
    PopulationClient client;
    client.id = options.first_id + c;
    client.hidden_label = labels[c];
    client.data.features = Matrix(options.samples_per_client, dim);
    client.data.targets = Matrix(options.samples_per_client, 1);
    for (std::size_t s = 0; s < options.samples_per_client; ++s) {
      double y = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double x = rng.Normal();
        client.data.features(s, d) = x;
        y += x * theta[d];
      }
      client.data.targets(s, 0) = y + options.noise_upper * rng.Uniform();
    }
    population.clients.push_back(std::move(client));
  }
  return population;
}

// ---------------------------------------------------------------------------
// Tabular (hospital-charge style) data.

struct TabularRow {
  std::string provider_id;
  double service_id = 0.0;
  double longitude = 0.0;
  double latitude = 0.0;
  double avg_total_payment = 0.0;
};

inline constexpr const char* kTabularColumns[] = {
    "provider_id", "service_id", "longitude", "latitude", "avg_total_payment"};

// Constant divisors; never derived from the data.
struct TabularScaling {
  double service = 1.0;
  double longitude = 1.0;
  double latitude = 1.0;
  double payment = 1.0;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<TabularRow> ReadTabularCsv(std::istream& in,
                                              const std::string& name = "<csv>") {
  std::string line;
  if (!std::getline(in, line) || Trim(line).empty()) {
    throw CsvError(name + ": empty file");
  }
  const std::vector<std::string_view> header = SplitFields(line);
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string key(header[i]);
    if (i == 0 && key.size() >= 3 && key.compare(0, 3, "\xEF\xBB\xBF") == 0) {
      key.erase(0, 3);  // UTF-8 BOM
    }
    bool known = false;
    for (const char* c : kTabularColumns) known = known || key == c;
    if (!known) throw CsvError(name + ":1: unknown column '" + key + "'");
    if (!column.emplace(key, i).second) {
      throw CsvError(name + ":1: duplicate column '" + key + "'");
    }
  }
  for (const char* c : kTabularColumns) {
    if (!column.contains(c)) {
      throw CsvError(name + ":1: missing column '" + std::string(c) + "'");
    }
  }

  std::vector<TabularRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::vector<std::string_view> fields = SplitFields(line);
    auto fail = [&](const std::string& what) {
      return CsvError(name + ":" + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() != header.size()) {
      throw fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
    }
    auto number = [&](const char* key) {
      const std::optional<double> v = ParseDouble(fields[column.at(key)]);
      if (!v || !std::isfinite(*v)) {
        throw fail(std::string("malformed ") + key + " '" +
                   std::string(fields[column.at(key)]) + "'");
      }
      return *v;
    };
    TabularRow row;
    row.provider_id = std::string(fields[column.at("provider_id")]);
    if (row.provider_id.empty()) throw fail("empty provider_id");
    row.service_id = number("service_id");
    row.longitude = number("longitude");
    row.latitude = number("latitude");
    row.avg_total_payment = number("avg_total_payment");
    if (row.avg_total_payment < 0.0) throw fail("negative avg_total_payment");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(name + ": no data rows");
  return rows;
}

inline std::vector<TabularRow> ReadTabularCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path.string() + ": cannot open");
  return ReadTabularCsv(in, path.string());
}

inline void WriteTabularCsv(std::ostream& out, const std::vector<TabularRow>& rows) {
  out << "provider_id,service_id,longitude,latitude,avg_total_payment\n";
  char buffer[160];
  for (const TabularRow& r : rows) {
    std::snprintf(buffer, sizeof(buffer), "%s,%.0f,%.6f,%.6f,%.2f\n",
                  r.provider_id.c_str(), r.service_id, r.longitude, r.latitude,
                  r.avg_total_payment);
    out << buffer;
  }
}

struct TabularOptions {
  TabularScaling scaling;
  // When nonempty, rows with other service ids are dropped.
  std::vector<double> service_allowlist;
};

// Groups rows by provider (client ids in order of first appearance). Features
// are (service_id, longitude, latitude) and the target is avg_total_payment,
// each divided by its scaling constant.
inline ClientPopulation BuildTabularPopulation(const std::vector<TabularRow>& rows,
                                               const TabularOptions& options) {
  const TabularScaling& s = options.scaling;
  if (!(s.service > 0) || !(s.longitude > 0) || !(s.latitude > 0) ||
      !(s.payment > 0)) {
    throw std::invalid_argument("TabularScaling: constants must be > 0");
  }
  const std::set<double> allow(options.service_allowlist.begin(),
                               options.service_allowlist.end());
  std::map<std::string, std::size_t> index;
  std::vector<std::string> keys;
  std::vector<std::vector<const TabularRow*>> grouped;
  for (const TabularRow& row : rows) {
    if (!allow.empty() && !allow.contains(row.service_id)) continue;
    auto [it, inserted] = index.emplace(row.provider_id, keys.size());
    if (inserted) {
      keys.push_back(row.provider_id);
      grouped.emplace_back();
    }
    grouped[it->second].push_back(&row);
  }

  ClientPopulation population;
  population.generator = "tabular";
  for (std::size_t c = 0; c < keys.size(); ++c) {
    PopulationClient client;
    client.id = c;
    client.source_key = keys[c];
    const auto& members = grouped[c];
    client.data.features = Matrix(members.size(), 3);
    client.data.targets = Matrix(members.size(), 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      client.data.features(i, 0) = members[i]->service_id / s.service;
      client.data.features(i, 1) = members[i]->longitude / s.longitude;
      client.data.features(i, 2) = members[i]->latitude / s.latitude;
      client.data.targets(i, 0) = members[i]->avg_total_payment / s.payment;
    }
    population.clients.push_back(std::move(client));
  }
  return population;
}

inline ClientPopulation IngestCsv(const std::filesystem::path& path,
                                  const TabularOptions& options) {
  return BuildTabularPopulation(ReadTabularCsv(path), options);
}

// Shuffled split; the validation side gets ceil(fraction * N) clients.
inline std::pair<ClientPopulation, ClientPopulation> SplitPopulation(
    const ClientPopulation& population, double validation_fraction, Rng& rng) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("SplitPopulation: fraction must be in (0, 1)");
  }
  const std::size_t total = population.size();
  // The small slack keeps e.g. 0.3 * 100 = 30.000000000000004 at 30.
  const std::size_t validation = static_cast<std::size_t>(
      std::ceil(validation_fraction * static_cast<double>(total) - 1e-9));
  if (validation == 0 || validation >= total) {
    throw std::invalid_argument(
        "SplitPopulation: fraction leaves one side empty (" +
        std::to_string(total) + " clients)");
  }
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  rng.Shuffle(order);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(validation));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(validation), order.end());

  ClientPopulation train, held_out;
  train.generator = held_out.generator = population.generator;
  for (std::size_t i = 0; i < total; ++i) {
    const PopulationClient& c = population.clients[order[i]];
    (i < validation ? held_out : train).clients.push_back(c);
  }
  return {std::move(train), std::move(held_out)};
}

// ---------------------------------------------------------------------------
// Hospital-like fixture.
//
// Generative model: each provider belongs to one of `clusters` latent regions
// (balanced, shuffled). Region c is centered at longitude
// -120 + 45 * (c + 0.5) / clusters and latitude 32 + 12 * frac(0.618 * c + 0.3),
// with N(0, 1) degree jitter per provider. Every provider offers every service
// v in 1..services, at a payment (dollars) of
//
//   payment_unit * (cost_offsets[c] + service_slope * v + noise_stddev * N(0, 1))
//
// clamped at 0.

struct FixtureOptions {
  std::size_t providers = 300;
  std::size_t services = 4;
  std::size_t clusters = 5;
  // Per-cluster cost offsets in payment units; default 1, 4, 7, ...
  std::vector<double> cost_offsets;
  double service_slope = 0.5;
  double noise_stddev = 0.1;
  double payment_unit = 1000.0;
  std::uint64_t seed = 0;
};

struct Fixture {
  std::vector<TabularRow> rows;
  // Latent region of each provider, by provider index.
  std::vector<int> provider_cluster;
};

inline Fixture MakeHospitalFixture(const FixtureOptions& options) {
  if (options.providers == 0 || options.services == 0 || options.clusters == 0) {
    throw std::invalid_argument("MakeHospitalFixture: counts must be >= 1");
  }
  std::vector<double> offsets = options.cost_offsets;
  if (offsets.empty()) {
    for (std::size_t c = 0; c < options.clusters; ++c) offsets.push_back(1.0 + 3.0 * c);
  }
  if (offsets.size() != options.clusters) {
    throw std::invalid_argument("MakeHospitalFixture: need one cost offset per cluster");
  }
  Rng rng(options.seed, StreamRole::kData, 0, 0);
  Fixture fixture;
  fixture.provider_cluster.resize(options.providers);
  for (std::size_t p = 0; p < options.providers; ++p) {
    fixture.provider_cluster[p] = static_cast<int>(p % options.clusters);
  }
  rng.Shuffle(fixture.provider_cluster);

  const double c_count = static_cast<double>(options.clusters);
  for (std::size_t p = 0; p < options.providers; ++p) {
    const int c = fixture.provider_cluster[p];
    double unused;
    const double lon = -120.0 + 45.0 * (c + 0.5) / c_count + rng.Normal();
    const double lat = 32.0 + 12.0 * std::modf(0.618 * c + 0.3, &unused) + rng.Normal();
    char id[32];
    std::snprintf(id, sizeof(id), "P%05zu", p);
    for (std::size_t v = 1; v <= options.services; ++v) {
      const double cost = offsets[c] + options.service_slope * static_cast<double>(v) +
                          options.noise_stddev * rng.Normal();
      fixture.rows.push_back({id, static_cast<double>(v), lon, lat,
                              std::max(0.0, options.payment_unit * cost)});
    }
  }
  return fixture;
}

}  // namespace metricfl

#endif  // METRICFL_DATA_HPP_
