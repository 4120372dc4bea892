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

#ifndef ISAMP_BOUNDS_HPP
#define ISAMP_BOUNDS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "isamp/logspace.hpp"
#include "isamp/model.hpp"

/**
 * \file
 * \brief KL-divergence based sample-size bounds.
 *
 * With L = D(nu || mu) = E_nu log rho(Y) and n = exp(L + t):
 *
 *   E|I_n(f) - I(f)| <= ||f||_{L2(nu)} (e^{-t/4} + 2 sqrt(P(log rho(Y) > L + t/2)))
 *
 * and, for n = exp(L - t),
 *
 *   P(I_n(1) >= 1 - delta) <= e^{-t/2} + P(log rho(Y) <= L - t/2) / (1 - delta).
 *
 * Everything here is a pure function of its inputs.
 */

namespace isamp {

enum class KlMethod { ClosedForm, ExactEnumeration, MonteCarlo };

struct KlResult {
  double value = 0.0;                    ///< nats, clamped at 0
  std::optional<double> std_error;       ///< MonteCarlo only
};

/// Mean and standard deviation of log rho(Y), Y ~ nu.
struct LogRhoMoments {
  double mean = 0.0;
  double sd = 0.0;
};

enum class TailSide { Above, AtOrBelow };
enum class BoundSide { Upper, Lower };

/// Law of log rho(Y) under nu, as needed by the bounds.
class TailModel {
 public:
  enum class Kind { ExactEnumeration, ClosedForm, NormalApprox, MonteCarlo };
  using TailFn = std::function<double(double)>;

  /// Exact law from a finite pair.
  static TailModel exact(const PairModel& pair);
  /// Exact law from (log rho, probability) atoms; probabilities must sum to 1.
  static TailModel exact(std::vector<std::pair<double, double>> law);
  /// `above(c) = P(log rho > c)`, `at_or_below(c) = P(log rho <= c)`.
  static TailModel closed_form(TailFn above, TailFn at_or_below);
  static TailModel normal(double mean, double sd);
  /// Empirical law of `samples` target draws.
  static TailModel monte_carlo(const PairModel& pair, std::size_t samples, std::uint64_t seed);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double probability(double c, TailSide side) const;

  /// NormalApprox parameters (zero otherwise).
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double sd() const { return sd_; }

 private:
  struct Table {
    std::vector<double> values;      // sorted log rho
    std::vector<double> above_from;  // above_from[i] = P(log rho >= values[i]), summed from the top
    std::vector<double> below_to;    // below_to[i] = P(log rho <= values[i]), summed from the bottom
  };
  static TailModel from_table(Kind kind, std::vector<std::pair<double, double>> law);

  Kind kind_ = Kind::ClosedForm;
  std::shared_ptr<const Table> table_;
  TailFn above_;
  TailFn at_or_below_;
  double mean_ = 0.0;
  double sd_ = 0.0;
};

/// Inputs of the error bounds. For Upper n = exp(L + t); for Lower n = exp(L - t).
struct BoundQuery {
  double L = 0.0;
  double t = 0.0;
  double f_norm = 1.0;
  double delta = 0.5;
  BoundSide side = BoundSide::Upper;
};

struct SelfNormalizedBound {
  double epsilon = 0.0;
  double deviation_threshold = 0.0;  ///< 2 ||f|| eps / (1 - eps); +inf when eps >= 1
  double probability = 0.0;          ///< min(2 eps, 1)
};

/// A non-negative quantity that may overflow double, held as its natural log (+inf when divergent).
struct LogScaleValue {
  double log_value = kNegInf;
  [[nodiscard]] bool is_infinite() const { return log_value == kInf; }
  [[nodiscard]] double linear() const { return std::exp(log_value); }
};

struct SampleSizePlan {
  double t = 0.0;
  double log_n = 0.0;
  std::optional<double> n;  ///< present only when log_n <= 700
};

KlResult kl_divergence(const PairModel& pair, KlMethod method, std::size_t mc_samples = 100000,
                       std::uint64_t mc_seed = 0);
LogRhoMoments logrho_moments(const PairModel& pair);

/// The most exact tail model available: enumeration, closed form, else a normal approximation.
TailModel tail_model_for(const PairModel& pair);

double logrho_tail(const TailModel& tail, double c, TailSide side);

/// Upper: f_norm (e^{-t/4} + 2 sqrt(P(log rho > L + t/2))). Lower: min(1, e^{-t/2} + P(log rho <= L - t/2)/(1-delta)).
/// Throws DomainError for t < 0 or delta outside (0, 1).
double thm1_bound(const BoundQuery& q, const TailModel& tail);
/// Self-normalized estimator bound: eps = (e^{-t/4} + 2 sqrt(P(log rho > L + t/2)))^{1/2}.
SelfNormalizedBound thm2_bound(const BoundQuery& q, const TailModel& tail);
/// Ratio bound for a rare event A, using L_A and the law of log rho_A given Y in A.
double thm3_bound(double L_A, double t, const TailModel& conditional_tail, double delta, BoundSide side);

/// int f^2 rho dnu - I(f)^2, in log scale; +inf when the integral diverges.
LogScaleValue exact_variance(const PairModel& pair, const Integrand& f);

/// Smallest t >= 0 with the upper bound <= target_error (bisection to 1e-9). log n = L + t.
/// Throws DomainError for target_error <= 0 and NoSolutionError when the bound never gets there.
SampleSizePlan required_sample_size(double L, double f_norm, const TailModel& tail, double target_error);

/// log10(eps^{-2} 2^{1 + eps^{-3}}): sample size by which the variance diagnostic fires.
double flaw_bound(double epsilon);

/// max{1/n, log log(1/eps_n) / log(1/eps_n)}, the q_n ceiling up to a universal constant.
double qn_necessity_bound(double epsilon_n, double n);

}  // namespace isamp

#endif  // ISAMP_BOUNDS_HPP
