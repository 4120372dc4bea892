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

#ifndef ISAMP_TESTS_GENERATORS_HPP
#define ISAMP_TESTS_GENERATORS_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "isamp/logspace.hpp"
#include "isamp/model.hpp"
#include "isamp/rng.hpp"

namespace isamp::testing {

inline constexpr std::size_t kPropertyCases = 200;

/// Small hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_{seed} {}

  double real(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_.below(static_cast<std::uint64_t>(hi - lo + 1))); }
  bool coin() { return rng_.bernoulli(0.5); }

  /// Log-weights in a wide range, with occasional zero weights.
  std::vector<double> log_weights(std::size_t n, double spread = 30.0, double zero_rate = 0.1) {
    std::vector<double> w(n);
    for (auto& x : w) {
      x = rng_.bernoulli(zero_rate) ? kNegInf : real(-spread, spread);
    }
    if (n > 0 && w[0] == kNegInf) {
      w[0] = 0.0;
    }
    return w;
  }

  std::vector<double> values(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) {
      x = real(lo, hi);
    }
    return v;
  }

  /// A random small finite pair: binomial with random parameters or a counterexample.
  PairModel finite_pair() {
    if (integer(0, 3) == 0) {
      return counterexample_pair(integer(2, 40));
    }
    return binomial_pair(integer(1, 40), real(0.05, 0.95), real(0.05, 0.95));
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

}  // namespace isamp::testing

#endif  // ISAMP_TESTS_GENERATORS_HPP
