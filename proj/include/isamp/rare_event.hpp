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

#ifndef ISAMP_RARE_EVENT_HPP
#define ISAMP_RARE_EVENT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "isamp/bounds.hpp"

/**
 * \file
 * \brief Binomial tail A = {j >= Np} under nu = Binomial(N, 1/2), sampled from mu = Binomial(N, theta).
 *
 * Tail masses and identities are exact rationals for N <= kMaxExactTrials and log-gamma sums beyond.
 */

namespace isamp {

inline constexpr int kMaxExactTrials = 1000;

struct RareBinomialSpec {
  int N = 0;
  double p = 0.0;      ///< in (1/2, 1), N p integral
  double theta = 0.0;  ///< proposal success probability

  /// k = N p. Throws DomainError when the spec is invalid.
  [[nodiscard]] int threshold() const;
};

struct BinomTail {
  double value = 0.0;
  double log_value = 0.0;
  std::optional<mpq_class> exact;  ///< present for N <= kMaxExactTrials
};

/// 2^{-N} sum_{j >= k} C(N, j).
BinomTail binom_tail(int N, int k);

/// Point mass C(N, k) / 2^N.
mpq_class binom_point_exact(int N, int k);

struct DeMoivreCheck {
  mpq_class lhs;  ///< 2^{-N} sum_{j >= k} C(N, j) (j - N/2)
  mpq_class rhs;  ///< (k/2) b(k; N, 1/2)
  bool equal = false;
};

DeMoivreCheck de_moivre_identity(int N, int k);

struct BahadurBracket {
  double R = 0.0;
  double Z = 0.0;
  double ratio = 0.0;  ///< R / Z, from exact rationals
  double x = 0.0;
  double upper = 0.0;  ///< 1 + x^{-2}
  bool holds = false;
};

/// Throws DomainError when Np + 1 - (N + 1)/2 <= 0.
BahadurBracket bahadur_bracket(int N, double p);

enum class LaMode { ExactDirect, ExactFormula, Asymptotic };

/// D(nu_A || mu_theta). Asymptotic is -2N ln(p^p (1-p)^{1-p}) as printed, not a limit of the exact value.
double rare_LA(int N, double p, double theta, LaMode mode);

/// Grid argmin of the exact L_A over theta in (1/2, 1 - grid_step).
double optimal_tilt(int N, double p, double grid_step);

/// Law of log rho_A(Y), Y ~ nu_A, with rho_A = d nu_A / d mu_theta.
TailModel rare_conditional_tail(const RareBinomialSpec& spec);

/// Exact mean of the truncated estimator, summed over all outcomes 0..N.
double rare_is_expectation(const RareBinomialSpec& spec);

struct RareRun {
  double estimate = 0.0;
  double ratio = 0.0;  ///< estimate / b(A; N, 1/2)
  std::size_t hits = 0;
};

/// I_n(A) = (1/n) sum rho(X_i) 1_A(X_i), X_i ~ Binomial(N, theta).
RareRun rare_is_run(const RareBinomialSpec& spec, std::size_t n, std::uint64_t seed);

/// Independent runs, replicate r on stream r of `seed`. OpenMP-parallel.
std::vector<RareRun> rare_is_replicates(const RareBinomialSpec& spec, std::size_t n, std::size_t replicates,
                                        std::uint64_t seed);
std::vector<RareRun> rare_is_replicates_serial(const RareBinomialSpec& spec, std::size_t n, std::size_t replicates,
                                               std::uint64_t seed);

}  // namespace isamp

#endif  // ISAMP_RARE_EVENT_HPP
