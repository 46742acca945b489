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

// Per-client privacy leakage bookkeeping.
//
// A release sanitized with epsilon makes every point within distance r of the
// released vector epsilon * r indistinguishable. Choosing
// epsilon = n / (nu * ||delta||) fixes the per-release cost at n / nu inside
// the ||delta||-neighborhood. Independent releases compose additively.

#ifndef METRICFL_ACCOUNTING_HPP_
#define METRICFL_ACCOUNTING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricfl/csv.hpp"
#include "metricfl/parameter_vector.hpp"

namespace metricfl {

// Radius substituted for a zero-norm update.
inline constexpr double kRadiusFloor = 1e-9;

inline constexpr double kInfiniteLeakage =
    std::numeric_limits<double>::infinity();

// epsilon = n / (nu * update_norm). Returns nullopt for a degenerate
// (zero-norm) update; callers substitute kRadiusFloor.
inline std::optional<double> HeuristicEpsilon(double update_norm,
                                              std::size_t dimension,
                                              double noise_multiplier) {
  if (!(noise_multiplier > 0.0)) {
    throw std::invalid_argument("HeuristicEpsilon: noise multiplier must be > 0");
  }
  if (!(update_norm >= 0.0)) {
    throw std::invalid_argument("HeuristicEpsilon: negative update norm");
  }
  if (update_norm == 0.0) return std::nullopt;
  return static_cast<double>(dimension) / (noise_multiplier * update_norm);
}

struct LeakageEvent {
  std::size_t round = 0;
  double epsilon = 0.0;
  // ||delta|| for the release; the neighborhood the guarantee covers.
  double radius = 0.0;
  // epsilon * radius.
  double leakage = 0.0;
  // Server-side cluster the release was assigned to; -1 if unknown.
  int cluster = -1;

  static LeakageEvent FromEpsilon(std::size_t round, double epsilon,
                                  double radius) {
    if (!(epsilon > 0.0) || !(radius >= 0.0)) {
      throw std::invalid_argument("LeakageEvent: invalid epsilon or radius");
    }
    return {round, epsilon, radius,
            std::isinf(epsilon) ? kInfiniteLeakage : epsilon * radius, -1};
  }

  // Event for a release calibrated with HeuristicEpsilon. The leakage is the
  // nominal n / nu, also for zero-norm updates (radius floored).
  static LeakageEvent FromHeuristic(std::size_t round, double update_norm,
                                    std::size_t dimension,
                                    double noise_multiplier) {
    const double radius = update_norm > 0.0 ? update_norm : kRadiusFloor;
    const double epsilon =
        *HeuristicEpsilon(radius, dimension, noise_multiplier);
    return {round, epsilon, radius,
            static_cast<double>(dimension) / noise_multiplier, -1};
  }

  // Release without sanitization: no guarantee, infinite leakage.
  static LeakageEvent Unsanitized(std::size_t round, double update_norm) {
    return {round, kInfiniteLeakage, update_norm, kInfiniteLeakage, -1};
  }

  // Leakage re-expressed for a neighborhood of another radius.
  double LeakageAtRadius(double r) const {
    return std::isinf(epsilon) ? kInfiniteLeakage : epsilon * r;
  }
};

struct ClientLedger {
  std::vector<LeakageEvent> events;  // ordered by round
  double composed_leakage = 0.0;
};

struct LeakageStats {
  std::size_t clients = 0;
  double median = 0.0;
  double max = 0.0;
};

struct LedgerSummary {
  LeakageStats overall;
  // Keyed by cluster id. A client belongs to the cluster of its latest event.
  std::map<int, LeakageStats> per_cluster;
  std::vector<std::size_t> rounds;
  // per_round_max[cluster][i]: max composed leakage, as of rounds[i], over
  // that cluster's members.
  std::map<int, std::vector<double>> per_round_max;
};

inline double Median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  if (std::isinf(values[mid - 1]) || std::isinf(values[mid])) {
    return std::max(values[mid - 1], values[mid]);
  }
  return 0.5 * (values[mid - 1] + values[mid]);
}

// Single writer; concurrent readers are fine while no write is in flight.
class PrivacyLedger {
 public:
  void RecordParticipation(ClientId client, const LeakageEvent& event) {
    ClientLedger& entry = clients_[client];
    for (const LeakageEvent& e : entry.events) {
      if (e.round == event.round) {
        throw std::invalid_argument(
            "PrivacyLedger: duplicate participation for client " +
            std::to_string(client) + " in round " +
            std::to_string(event.round));
      }
    }
    auto pos = std::upper_bound(
        entry.events.begin(), entry.events.end(), event,
        [](const LeakageEvent& a, const LeakageEvent& b) {
          return a.round < b.round;
        });
    entry.events.insert(pos, event);
    entry.composed_leakage += event.leakage;
  }

  void RecordParticipation(ClientId client, std::size_t round, double epsilon,
                           double radius, int cluster = -1) {
    LeakageEvent event = LeakageEvent::FromEpsilon(round, epsilon, radius);
    event.cluster = cluster;
    RecordParticipation(client, event);
  }

  double ComposedLeakage(ClientId client) const {
    auto it = clients_.find(client);
    return it == clients_.end() ? 0.0 : it->second.composed_leakage;
  }

  std::size_t Participations(ClientId client) const {
    auto it = clients_.find(client);
    return it == clients_.end() ? 0 : it->second.events.size();
  }

  const std::map<ClientId, ClientLedger>& clients() const { return clients_; }
  bool empty() const { return clients_.empty(); }

  LedgerSummary Summarize() const {
    LedgerSummary summary;
    if (clients_.empty()) return summary;

    std::set<std::size_t> round_set;
    std::map<int, std::vector<double>> cluster_values;
    std::vector<double> all;
    for (const auto& [id, entry] : clients_) {
      for (const LeakageEvent& e : entry.events) round_set.insert(e.round);
      const int cluster = entry.events.empty() ? -1 : entry.events.back().cluster;
      cluster_values[cluster].push_back(entry.composed_leakage);
      all.push_back(entry.composed_leakage);
    }
    auto stats = [](const std::vector<double>& v) {
      return LeakageStats{v.size(), Median(v),
                          *std::max_element(v.begin(), v.end())};
    };
    summary.overall = stats(all);
    for (const auto& [cluster, values] : cluster_values) {
      summary.per_cluster[cluster] = stats(values);
    }

    if (round_set.empty()) return summary;
    const std::size_t last = *round_set.rbegin();
    for (std::size_t r = 0; r <= last; ++r) summary.rounds.push_back(r);
    for (const auto& [cluster, unused] : cluster_values) {
      summary.per_round_max[cluster].assign(summary.rounds.size(), 0.0);
    }
    for (const auto& [id, entry] : clients_) {
      if (entry.events.empty()) continue;
      std::vector<double>& series =
          summary.per_round_max[entry.events.back().cluster];
      double running = 0.0;
      std::size_t next = 0;
      for (std::size_t r = 0; r <= last; ++r) {
        while (next < entry.events.size() && entry.events[next].round == r) {
          running += entry.events[next].leakage;
          ++next;
        }
        series[r] = std::max(series[r], running);
      }
    }
    return summary;
  }

  // Columns: client_id, cluster_id, round, epsilon, radius, leakage,
  // composed_leakage (running sum as of that event).
  void WriteCsv(std::ostream& out) const {
    out << "client_id,cluster_id,round,epsilon,radius,leakage,composed_leakage\n";
    for (const auto& [id, entry] : clients_) {
      double running = 0.0;
      for (const LeakageEvent& e : entry.events) {
        running += e.leakage;
        out << id << ',' << e.cluster << ',' << e.round << ','
            << FormatDouble(e.epsilon) << ',' << FormatDouble(e.radius) << ','
            << FormatDouble(e.leakage) << ',' << FormatDouble(running) << '\n';
      }
    }
  }

 private:
  std::map<ClientId, ClientLedger> clients_;
};

}  // namespace metricfl

#endif  // METRICFL_ACCOUNTING_HPP_
