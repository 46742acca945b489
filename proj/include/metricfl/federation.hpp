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

// Personalized federated training with locally sanitized releases.
//
// Each round the server samples U clients and broadcasts its k hypotheses.
// A client picks the hypothesis with the lowest loss on its data, trains it
// locally, and releases the full updated vector plus Euclidean Laplace noise
// calibrated so that the release costs n / nu inside the neighborhood of
// radius ||update||. The server clusters the releases with k-means seeded at
// the current hypotheses and replaces each hypothesis with the mean of its
// cluster. Nothing else leaves the client: no sample counts, no raw update,
// no self-declared cluster.

#ifndef METRICFL_FEDERATION_HPP_
#define METRICFL_FEDERATION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metricfl/accounting.hpp"
#include "metricfl/clustering.hpp"
#include "metricfl/csv.hpp"
#include "metricfl/data.hpp"
#include "metricfl/mechanism.hpp"
#include "metricfl/models.hpp"
#include "metricfl/parameter_vector.hpp"
#include "metricfl/rng.hpp"

namespace metricfl {

struct FederationConfig {
  std::size_t k = 2;                  // hypotheses
  std::size_t rounds = 100;           // T
  std::size_t users_per_round = 7;    // U
  std::size_t local_epochs = 1;       // E
  double step_size = 0.1;             // s
  std::size_t batch_size = 10;        // B_s
  double noise_multiplier = 5.0;      // nu; 0 disables sanitization
  std::size_t validation_patience = 6;  // evaluations; 0 disables stopping
  std::size_t validation_every = 1;     // rounds
  std::size_t validation_sample = 0;    // clients per evaluation; 0 = all
  std::optional<double> budget_cap;     // per-client composed leakage
  Objective objective = Objective::kRmse;
  std::uint64_t master_seed = 0;
  KMeansOptions kmeans;

  void Validate(std::size_t population) const {
    if (k < 1) throw std::invalid_argument("FederationConfig: k must be >= 1");
    if (users_per_round < 1 || users_per_round > population) {
      throw std::invalid_argument("FederationConfig: need 1 <= U <= N (U = " +
                                  std::to_string(users_per_round) + ", N = " +
                                  std::to_string(population) + ")");
    }
    if (!(step_size > 0.0)) {
      throw std::invalid_argument("FederationConfig: step size must be > 0");
    }
    if (!(noise_multiplier >= 0.0) || std::isinf(noise_multiplier)) {
      throw std::invalid_argument("FederationConfig: noise multiplier must be >= 0");
    }
    if (batch_size < 1) {
      throw std::invalid_argument("FederationConfig: batch size must be >= 1");
    }
    if (validation_every < 1) {
      throw std::invalid_argument("FederationConfig: validation_every must be >= 1");
    }
  }

  LocalUpdateOptions local_update() const {
    return {step_size, local_epochs, batch_size, objective};
  }

  // Nominal leakage of one participation.
  double PerRoundLeakage(std::size_t dimension) const {
    return noise_multiplier > 0.0
               ? static_cast<double>(dimension) / noise_multiplier
               : kInfiniteLeakage;
  }
};

struct HypothesisSet {
  std::size_t round = 0;
  std::vector<ParameterVector> hypotheses;

  std::size_t k() const { return hypotheses.size(); }
  std::size_t dimension() const {
    return hypotheses.empty() ? 0 : hypotheses.front().dimension();
  }
};

class InsufficientClients : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Index of the hypothesis with the lowest loss on `data`; ties go to the
// lowest index.
inline std::size_t SelectHypothesis(const ModelSpec& spec,
                                    const std::vector<ParameterVector>& hypotheses,
                                    const Batch& data, Objective objective,
                                    double* best_loss = nullptr) {
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < hypotheses.size(); ++j) {
    const double value = Loss(spec, hypotheses[j], data, objective);
    if (value < best_value) {
      best_value = value;
      best = j;
    }
  }
  if (best_loss != nullptr) *best_loss = best_value;
  return best;
}

struct ClientUpdate {
  std::size_t chosen = 0;
  double local_loss = 0.0;  // at the chosen hypothesis, before training
  double update_norm = 0.0;
  ParameterVector sanitized;
  LeakageEvent event;
};

// Hypothesis selection, local training and sanitization for one client.
inline ClientUpdate ClientStep(const Batch& data, const HypothesisSet& hypotheses,
                               const ModelSpec& spec,
                               const FederationConfig& config, Rng& rng) {
  if (data.empty()) throw std::invalid_argument("ClientStep: empty dataset");
  if (hypotheses.hypotheses.empty()) {
    throw std::invalid_argument("ClientStep: no hypotheses");
  }
  ClientUpdate update;
  update.chosen = SelectHypothesis(spec, hypotheses.hypotheses, data,
                                   config.objective, &update.local_loss);
  const ParameterVector& received = hypotheses.hypotheses[update.chosen];
  ParameterVector trained =
      LocalUpdate(spec, received, data, config.local_update(), rng);
  update.update_norm = Distance(trained, received);

  if (config.noise_multiplier == 0.0) {
    update.event = LeakageEvent::Unsanitized(hypotheses.round, update.update_norm);
    update.sanitized = std::move(trained);
    return update;
  }
  update.event = LeakageEvent::FromHeuristic(hypotheses.round, update.update_norm,
                                             trained.dimension(),
                                             config.noise_multiplier);
  update.sanitized =
      Sanitize(trained, NoiseScale(update.event.epsilon, trained.dimension()), rng);
  return update;
}

inline Rng ClientRng(const FederationConfig& config, ClientId client,
                     std::size_t round) {
  return Rng(config.master_seed, StreamRole::kClient, client, round);
}

// Everything the server observes in a round.
struct ServerView {
  std::vector<ClientId> sampled;       // ascending
  std::vector<LabeledPoint> received;  // sanitized releases, ascending id
  ClusterAssignment assignment;
};

// Client-side diagnostics; kept apart from ServerView.
struct ClientReport {
  ClientId client = 0;
  std::size_t chosen = 0;
  double local_loss = 0.0;
  double update_norm = 0.0;
  double leakage = 0.0;
};

struct RoundRecord {
  std::size_t round = 0;
  ServerView server;
  std::vector<ClientReport> clients;
  double mean_train_loss = 0.0;
};

struct FederationState {
  HypothesisSet hypotheses;
  PrivacyLedger ledger;
};

namespace internal {

inline std::vector<ClientId> SampleClients(
    std::span<const FederatedClient> clients, const FederationConfig& config,
    const PrivacyLedger& ledger, std::size_t dimension, std::size_t round) {
  std::vector<ClientId> pool;
  pool.reserve(clients.size());
  const double cost = config.PerRoundLeakage(dimension);
  for (const FederatedClient& c : clients) {
    if (config.budget_cap &&
        !(ledger.ComposedLeakage(c.id) + cost <= *config.budget_cap + 1e-12)) {
      continue;
    }
    pool.push_back(c.id);
  }
  std::sort(pool.begin(), pool.end());
  if (pool.size() < config.users_per_round) {
    throw InsufficientClients("round " + std::to_string(round) + ": " +
                              std::to_string(pool.size()) +
                              " eligible clients, need " +
                              std::to_string(config.users_per_round));
  }
  Rng rng(config.master_seed, StreamRole::kServer, 0, round);
  for (std::size_t i = 0; i < config.users_per_round; ++i) {
    const std::size_t j = i + rng.UniformIndex(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(config.users_per_round);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace internal

// One round of training. Updates `state` in place and returns the record.
inline RoundRecord ServerRound(FederationState& state,
                               std::span<const FederatedClient> clients,
                               const ModelSpec& spec,
                               const FederationConfig& config) {
  const HypothesisSet& current = state.hypotheses;
  const std::size_t round = current.round;
  const std::size_t n = current.dimension();
  CheckDimension("ServerRound", spec.ParameterCount(), n);

  std::map<ClientId, const FederatedClient*> by_id;
  for (const FederatedClient& c : clients) by_id[c.id] = &c;

  RoundRecord record;
  record.round = round;
  record.server.sampled =
      internal::SampleClients(clients, config, state.ledger, n, round);

  // Client steps are independent (own sub-stream each); results are consumed
  // in ascending id order.
  std::vector<LeakageEvent> events;
  double loss_sum = 0.0;
  for (ClientId id : record.server.sampled) {
    Rng rng = ClientRng(config, id, round);
    ClientUpdate update = ClientStep(by_id.at(id)->data, current, spec, config, rng);
    record.server.received.push_back({id, update.sanitized});
    record.clients.push_back({id, update.chosen, update.local_loss,
                              update.update_norm, update.event.leakage});
    events.push_back(update.event);
    loss_sum += update.local_loss;
  }
  record.mean_train_loss = loss_sum / static_cast<double>(record.clients.size());

  record.server.assignment = KMeansFromHypotheses(
      record.server.received, current.hypotheses, config.kmeans);

  const std::size_t k = current.k();
  std::vector<std::vector<double>> sums(k, std::vector<double>(n, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < record.server.received.size(); ++i) {
    const std::size_t j = record.server.assignment.labels[i];
    ++counts[j];
    for (std::size_t d = 0; d < n; ++d) {
      sums[j][d] += record.server.received[i].value[d];
    }
  }
  HypothesisSet next;
  next.round = round + 1;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) {
      next.hypotheses.push_back(current.hypotheses[j]);
      continue;
    }
    for (double& v : sums[j]) v /= static_cast<double>(counts[j]);
    next.hypotheses.emplace_back(std::move(sums[j]));
  }

  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i].cluster = static_cast<int>(record.server.assignment.labels[i]);
    state.ledger.RecordParticipation(record.server.sampled[i], events[i]);
  }
  state.hypotheses = std::move(next);
  return record;
}

// Counts evaluations since the best (strictly lowest) loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Returns true when training should stop.
  bool Update(double loss) {
    if (loss < best_) {
      best_ = loss;
      since_best_ = 0;
      improved_ = true;
    } else {
      ++since_best_;
      improved_ = false;
    }
    return patience_ > 0 && since_best_ >= patience_;
  }

  bool improved() const { return improved_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t since_best_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

// Mean over clients of the loss at each client's best-fitting hypothesis.
inline double PersonalizedLoss(std::span<const FederatedClient> clients,
                               const HypothesisSet& hypotheses,
                               const ModelSpec& spec, Objective objective) {
  if (clients.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const FederatedClient& c : clients) {
    double best = 0.0;
    SelectHypothesis(spec, hypotheses.hypotheses, c.data, objective, &best);
    sum += best;
  }
  return sum / static_cast<double>(clients.size());
}

inline HypothesisSet InitialHypotheses(const ModelSpec& spec, std::size_t k,
                                       std::uint64_t master_seed) {
  Rng rng(master_seed, StreamRole::kHypotheses, 0, 0);
  HypothesisSet set;
  for (std::size_t j = 0; j < k; ++j) {
    set.hypotheses.push_back(InitialParameters(spec, rng));
  }
  return set;
}

struct RoundMetrics {
  std::size_t round = 0;
  double mean_train_loss = 0.0;
  std::optional<double> validation_loss;
  std::vector<double> centroid_norms;  // hypotheses after the round
};

struct ExperimentResult {
  HypothesisSet best;
  HypothesisSet last;
  std::optional<double> best_validation_loss;
  std::vector<RoundMetrics> history;
  std::vector<RoundRecord> rounds;
  PrivacyLedger ledger;
};

// Runs up to config.rounds rounds with validation-based early stopping. The
// returned `best` set is the one from the best validation evaluation (the
// initial set if no evaluation happened).
inline ExperimentResult RunExperiment(std::span<const FederatedClient> train,
                                      std::span<const FederatedClient> validation,
                                      const ModelSpec& spec,
                                      const FederationConfig& config,
                                      std::optional<HypothesisSet> initial = {}) {
  spec.Validate();
  config.Validate(train.size());
  FederationState state;
  state.hypotheses =
      initial ? *initial : InitialHypotheses(spec, config.k, config.master_seed);
  if (state.hypotheses.k() != config.k) {
    throw std::invalid_argument("RunExperiment: initial hypothesis count != k");
  }

  ExperimentResult result;
  result.best = state.hypotheses;
  EarlyStopping stopping(config.validation_patience);

  for (std::size_t t = 0; t < config.rounds; ++t) {
    RoundRecord record = ServerRound(state, train, spec, config);
    RoundMetrics metrics;
    metrics.round = record.round;
    metrics.mean_train_loss = record.mean_train_loss;
    for (const ParameterVector& h : state.hypotheses.hypotheses) {
      metrics.centroid_norms.push_back(h.Norm());
    }
    result.rounds.push_back(std::move(record));

    bool stop = false;
    if (!validation.empty() && (t + 1) % config.validation_every == 0) {
      std::vector<FederatedClient> sampled;
      std::span<const FederatedClient> evaluated = validation;
      if (config.validation_sample > 0 &&
          config.validation_sample < validation.size()) {
        Rng rng(config.master_seed, StreamRole::kValidation, 0, t);
        std::vector<std::size_t> idx(validation.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng.Shuffle(idx);
        idx.resize(config.validation_sample);
        std::sort(idx.begin(), idx.end());
        for (std::size_t i : idx) sampled.push_back(validation[i]);
        evaluated = sampled;
      }
      const double loss =
          PersonalizedLoss(evaluated, state.hypotheses, spec, config.objective);
      metrics.validation_loss = loss;
      stop = stopping.Update(loss);
      if (stopping.improved()) {
        result.best = state.hypotheses;
        result.best_validation_loss = loss;
      }
    } else if (validation.empty()) {
      result.best = state.hypotheses;
    }
    result.history.push_back(std::move(metrics));
    if (stop) break;
  }
  result.last = state.hypotheses;
  result.ledger = std::move(state.ledger);
  return result;
}

// ---------------------------------------------------------------------------
// Exports.

// Columns: round, mean_train_loss, validation_loss, centroid_norm_<j>,
// max_leakage_cluster_<j>. validation_loss is empty on rounds without an
// evaluation. The leakage series is the running max of composed leakage over
// the clients of each server cluster.
inline void WriteMetricsCsv(std::ostream& out, const ExperimentResult& result,
                            std::size_t k) {
  const LedgerSummary summary = result.ledger.Summarize();
  out << "round,mean_train_loss,validation_loss";
  for (std::size_t j = 0; j < k; ++j) out << ",centroid_norm_" << j;
  for (std::size_t j = 0; j < k; ++j) out << ",max_leakage_cluster_" << j;
  out << '\n';
  for (const RoundMetrics& m : result.history) {
    out << m.round << ',' << FormatDouble(m.mean_train_loss) << ','
        << (m.validation_loss ? FormatDouble(*m.validation_loss) : "");
    for (double norm : m.centroid_norms) out << ',' << FormatDouble(norm);
    for (std::size_t j = 0; j < k; ++j) {
      double value = 0.0;
      auto it = summary.per_round_max.find(static_cast<int>(j));
      if (it != summary.per_round_max.end() && m.round < it->second.size()) {
        value = it->second[m.round];
      }
      out << ',' << FormatDouble(value);
    }
    out << '\n';
  }
}

// "k <k> n <n>" header, then one space-separated vector per line.
inline void WriteHypotheses(std::ostream& out, const HypothesisSet& set) {
  out << "k " << set.k() << " n " << set.dimension() << '\n';
  for (const ParameterVector& h : set.hypotheses) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      out << (i ? " " : "") << FormatDouble(h[i]);
    }
    out << '\n';
  }
}

inline HypothesisSet ReadHypotheses(std::istream& in) {
  std::string tag_k, tag_n;
  std::size_t k = 0, n = 0;
  if (!(in >> tag_k >> k >> tag_n >> n) || tag_k != "k" || tag_n != "n") {
    throw std::invalid_argument("ReadHypotheses: malformed header");
  }
  HypothesisSet set;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> values(n);
    for (double& v : values) {
      std::string token;
      if (!(in >> token)) throw std::invalid_argument("ReadHypotheses: truncated");
      const std::optional<double> parsed = ParseDouble(token);
      if (!parsed) throw std::invalid_argument("ReadHypotheses: bad value " + token);
      v = *parsed;
    }
    set.hypotheses.emplace_back(std::move(values));
  }
  return set;
}

}  // namespace metricfl

#endif  // METRICFL_FEDERATION_HPP_
