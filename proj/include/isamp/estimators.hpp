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

#ifndef ISAMP_ESTIMATORS_HPP
#define ISAMP_ESTIMATORS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "isamp/logspace.hpp"
#include "isamp/model.hpp"
#include "isamp/parallel.hpp"
#include "isamp/rng.hpp"

/**
 * \file
 * \brief Importance-sampling estimators and weight-degeneracy diagnostics.
 *
 * Weights arrive as natural logs. Zero weights (-inf) are legal and contribute nothing. Integrand
 * values may have either sign; positive and negative parts are accumulated separately in log space.
 */

namespace isamp {

/// Log-weights and (optionally) integrand values of n draws.
struct WeightedBatch {
  std::vector<double> log_weights;
  std::vector<double> f_values;  ///< Empty when the batch carries weights only.

  [[nodiscard]] std::size_t size() const { return log_weights.size(); }
  [[nodiscard]] bool has_f_values() const { return !f_values.empty(); }
};

/// Per-batch summary. `Q_n = exp(max_log_weight - log_sum_weights)`.
struct DiagnosticReport {
  std::size_t n = 0;
  double I_n = 0.0;
  double J_n = 0.0;
  double v_n = 0.0;
  double Q_n = 0.0;
  double max_log_weight = kNegInf;
  double log_sum_weights = kNegInf;
};

/**
 * Single-pass accumulator for I_n, J_n, v_n and Q_n.
 *
 * `merge` is associative and commutative up to rounding, so partial accumulators built on
 * disjoint pieces of a sample can be combined in any order.
 */
class WeightAccumulator {
 public:
  void add(double log_weight, double f = 1.0);
  void merge(const WeightAccumulator& other);

  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double estimate_In() const;
  /// Throws DegenerateBatchError when every weight is zero.
  [[nodiscard]] double estimate_Jn() const;
  [[nodiscard]] double empirical_variance() const;
  /// Throws DegenerateBatchError when every weight is zero.
  [[nodiscard]] double q_statistic() const;
  [[nodiscard]] double max_log_weight() const { return weights_.max(); }
  [[nodiscard]] double log_sum_weights() const { return weights_.value(); }
  /// J_n is NaN when all weights are zero; Q_n likewise.
  [[nodiscard]] DiagnosticReport report() const;

 private:
  std::size_t n_ = 0;
  LogSumExp weights_;
  LogSumExp positive_;  // sum of f * w over f > 0
  LogSumExp negative_;  // sum of |f| * w over f < 0
  LogSumExp squares_;   // sum of f^2 * w^2
};

/// I_n(f) = (1/n) sum f_i e^{w_i}. Throws UsageError without f-values.
double estimate_In(const WeightedBatch& batch);
/// J_n(f) = sum f_i e^{w_i} / sum e^{w_i}.
double estimate_Jn(const WeightedBatch& batch);
/// v_n(f) = (1/n^2) sum f_i^2 e^{2 w_i} - I_n(f)^2 / n, clamped at 0.
double empirical_variance(const WeightedBatch& batch);
/// Q_n = max_i e^{w_i} / sum_i e^{w_i}. Needs no f-values.
double q_statistic(const WeightedBatch& batch);
/// All of the above at once; f defaults to 1 when the batch has no f-values.
DiagnosticReport diagnose_batch(const WeightedBatch& batch);

/// Draws n points from the proposal and records log-weights and f-values.
WeightedBatch draw_batch(const PairModel& pair, const Integrand& f, std::size_t n, Rng& rng);
/// Same draws as `draw_batch`, accumulated without storing the batch.
WeightAccumulator accumulate_draws(const PairModel& pair, const Integrand& f, std::size_t n, Rng& rng);

/// One `DiagnosticReport` per replicate; replicate r uses stream (seed, r).
std::vector<DiagnosticReport> simulate_reports(const PairModel& pair, const Integrand& f, std::size_t n,
                                               std::size_t replicates, std::uint64_t seed);
std::vector<DiagnosticReport> simulate_reports_serial(const PairModel& pair, const Integrand& f, std::size_t n,
                                                      std::size_t replicates, std::uint64_t seed);

/// q_n = E(Q_n) by replication. Requires replicates >= 2.
McEstimate estimate_qn(const PairModel& pair, std::size_t n, std::size_t replicates, std::uint64_t seed);
McEstimate estimate_qn_serial(const PairModel& pair, std::size_t n, std::size_t replicates, std::uint64_t seed);

/// E|I_n(f) - exact_I| by replication.
McEstimate estimate_mad(const PairModel& pair, const Integrand& f, std::size_t n, std::size_t replicates,
                        double exact_I, std::uint64_t seed);
McEstimate estimate_mad_serial(const PairModel& pair, const Integrand& f, std::size_t n, std::size_t replicates,
                               double exact_I, std::uint64_t seed);

inline constexpr std::size_t kDefaultMadReplicates = 200;
inline constexpr std::size_t kDefaultQnReplicates = 500;
inline constexpr double kDefaultQnThreshold = 0.01;

}  // namespace isamp

#endif  // ISAMP_ESTIMATORS_HPP
