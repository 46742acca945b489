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

#ifndef METRICFL_RNG_HPP_
#define METRICFL_RNG_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace metricfl {

// Role tags for stream splitting. The numeric values are part of the
// reproducibility contract; never renumber them.
enum class StreamRole : std::uint64_t {
  kServer = 1,
  kClient = 2,
  kHypotheses = 3,
  kData = 4,
  kSplit = 5,
  kValidation = 6,
  kDiagnostics = 7,
};

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the sub-stream owned by (role, id, round) under `master_seed`:
//   Mix64(Mix64(Mix64(Mix64(master) ^ role) ^ id) ^ round)
// Every client and the server draw from their own sub-stream, so the order in
// which clients are simulated never changes any result.
constexpr std::uint64_t StreamSeed(std::uint64_t master_seed, StreamRole role,
                                   std::uint64_t id, std::uint64_t round) {
  std::uint64_t h = Mix64(master_seed);
  h = Mix64(h ^ static_cast<std::uint64_t>(role));
  h = Mix64(h ^ id);
  return Mix64(h ^ round);
}

// Random stream with platform-independent output. The engine is
// std::mt19937_64 (its sequence is fixed by the standard); all derived
// distributions are implemented here because the std:: distribution objects
// are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, StreamRole role, std::uint64_t id,
      std::uint64_t round)
      : engine_(StreamSeed(master_seed, role, id, round)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Unbiased integer in [0, n).
  std::uint64_t UniformIndex(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("UniformIndex: empty range");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Exponential with the given rate (mean 1 / rate).
  double Exponential(double rate) {
    // 1 - Uniform() lies in (0, 1], so the logarithm is finite.
    return -std::log(1.0 - Uniform()) / rate;
  }

  // Standard normal via the Marsaglia polar method.
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double Normal(double mean, double stddev) {
    return mean + stddev * Normal();
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = UniformIndex(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace metricfl

#endif  // METRICFL_RNG_HPP_
