// Copyright 2026 The isamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISAMP_RNG_HPP
#define ISAMP_RNG_HPP

#include <cstdint>
#include <random>

/**
 * \file
 * \brief Seeded random streams.
 *
 * Every stochastic routine takes a 64-bit master seed. Independent work items (replicates,
 * grid points, draw chunks) get their own stream keyed by (master, stream, substream), so results
 * do not depend on how work is scheduled across threads.
 */

namespace isamp {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

/// Seed for stream `(stream, substream)` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + 0x632be59bd9b4e019ULL * (substream + 1));
}

/// A 64-bit Mersenne Twister with the handful of variates this library needs.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_{seed} {}

  /// Stream `(stream, substream)` derived from `master`.
  static Rng stream(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0) {
    return Rng{derive_seed(master, stream, substream)};
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11U) * 0x1.0p-53; }

  /// Uniform integer on [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Exponential with the given mean.
  double exponential(double mean);

  /// Binomial(trials, p); exact for any trial count representable in int64.
  std::int64_t binomial(std::int64_t trials, double p);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace isamp

#endif  // ISAMP_RNG_HPP
