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

#include "isamp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "isamp/errors.hpp"

namespace isamp {
namespace {

void require_f_values(const WeightedBatch& batch) {
  if (!batch.has_f_values()) {
    throw UsageError("batch has no integrand values");
  }
  if (batch.f_values.size() != batch.log_weights.size()) {
    throw UsageError("log_weights and f_values differ in length");
  }
}

WeightAccumulator accumulate(const WeightedBatch& batch) {
  WeightAccumulator acc;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    acc.add(batch.log_weights[i], batch.has_f_values() ? batch.f_values[i] : 1.0);
  }
  return acc;
}

void require_replicates(std::size_t replicates) {
  if (replicates < 2) {
    throw UsageError("at least two replicates are needed for a standard error");
  }
}

}  // namespace

void WeightAccumulator::add(double log_weight, double f) {
  ++n_;
  weights_.add(log_weight);
  if (log_weight == kNegInf || f == 0.0) {
    return;
  }
  const double log_abs_f = std::log(std::abs(f));
  (f > 0.0 ? positive_ : negative_).add(log_abs_f + log_weight);
  squares_.add(2.0 * (log_abs_f + log_weight));
}

void WeightAccumulator::merge(const WeightAccumulator& other) {
  n_ += other.n_;
  weights_.merge(other.weights_);
  positive_.merge(other.positive_);
  negative_.merge(other.negative_);
  squares_.merge(other.squares_);
}

double WeightAccumulator::estimate_In() const {
  if (n_ == 0) {
    throw UsageError("empty batch");
  }
  const double log_n = std::log(static_cast<double>(n_));
  return std::exp(positive_.value() - log_n) - std::exp(negative_.value() - log_n);
}

double WeightAccumulator::estimate_Jn() const {
  if (weights_.empty()) {
    throw DegenerateBatchError("all weights are zero");
  }
  const double lw = weights_.value();
  return std::exp(positive_.value() - lw) - std::exp(negative_.value() - lw);
}

double WeightAccumulator::empirical_variance() const {
  if (n_ == 0) {
    throw UsageError("empty batch");
  }
  const auto n = static_cast<double>(n_);
  const double in = estimate_In();
  const double v = std::exp(squares_.value() - 2.0 * std::log(n)) - in * in / n;
  return std::max(v, 0.0);
}

double WeightAccumulator::q_statistic() const {
  if (weights_.empty()) {
    throw DegenerateBatchError("all weights are zero");
  }
  return weights_.max_share();
}

DiagnosticReport WeightAccumulator::report() const {
  DiagnosticReport r;
  r.n = n_;
  r.I_n = estimate_In();
  r.v_n = empirical_variance();
  r.max_log_weight = max_log_weight();
  r.log_sum_weights = log_sum_weights();
  if (weights_.empty()) {
    r.J_n = std::numeric_limits<double>::quiet_NaN();
    r.Q_n = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.J_n = estimate_Jn();
    r.Q_n = q_statistic();
  }
  return r;
}

double estimate_In(const WeightedBatch& batch) {
  require_f_values(batch);
  return accumulate(batch).estimate_In();
}

double estimate_Jn(const WeightedBatch& batch) {
  require_f_values(batch);
  return accumulate(batch).estimate_Jn();
}

double empirical_variance(const WeightedBatch& batch) {
  require_f_values(batch);
  return accumulate(batch).empirical_variance();
}

double q_statistic(const WeightedBatch& batch) {
  // Direct form rather than the accumulator: shifting every log-weight by a constant then leaves
  // the result bit-identical.
  if (batch.log_weights.empty()) {
    throw DegenerateBatchError("empty batch");
  }
  const double max = *std::max_element(batch.log_weights.begin(), batch.log_weights.end());
  if (max == kNegInf) {
    throw DegenerateBatchError("all weights are zero");
  }
  double sum = 0.0;
  for (const double w : batch.log_weights) {
    sum += std::exp(w - max);
  }
  return 1.0 / sum;
}

DiagnosticReport diagnose_batch(const WeightedBatch& batch) {
  if (batch.has_f_values()) {
    require_f_values(batch);
  }
  return accumulate(batch).report();
}

WeightedBatch draw_batch(const PairModel& pair, const Integrand& f, std::size_t n, Rng& rng) {
  WeightedBatch batch;
  batch.log_weights.reserve(n);
  batch.f_values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SamplePoint x = pair.draw(rng);
    batch.log_weights.push_back(x.cached_log_weight);
    batch.f_values.push_back(f(x.value));
  }
  return batch;
}

WeightAccumulator accumulate_draws(const PairModel& pair, const Integrand& f, std::size_t n, Rng& rng) {
  WeightAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    const SamplePoint x = pair.draw(rng);
    acc.add(x.cached_log_weight, f(x.value));
  }
  return acc;
}

std::vector<DiagnosticReport> simulate_reports(const PairModel& pair, const Integrand& f, std::size_t n,
                                               std::size_t replicates, std::uint64_t seed) {
  return map_replicates(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    return accumulate_draws(pair, f, n, rng).report();
  });
}

std::vector<DiagnosticReport> simulate_reports_serial(const PairModel& pair, const Integrand& f, std::size_t n,
                                                      std::size_t replicates, std::uint64_t seed) {
  return map_replicates_serial(replicates, [&](std::size_t r) {
    Rng rng = Rng::stream(seed, r);
    return accumulate_draws(pair, f, n, rng).report();
  });
}

namespace {

double replicate_q(const PairModel& pair, std::size_t n, std::uint64_t seed, std::size_t r) {
  Rng rng = Rng::stream(seed, r);
  WeightAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    acc.add(pair.draw(rng).cached_log_weight);
  }
  return acc.q_statistic();
}

double replicate_abs_error(const PairModel& pair, const Integrand& f, std::size_t n, double exact_I,
                           std::uint64_t seed, std::size_t r) {
  Rng rng = Rng::stream(seed, r);
  return std::abs(accumulate_draws(pair, f, n, rng).estimate_In() - exact_I);
}

}  // namespace

McEstimate estimate_qn(const PairModel& pair, std::size_t n, std::size_t replicates, std::uint64_t seed) {
  require_replicates(replicates);
  const auto values = map_replicates(replicates, [&](std::size_t r) { return replicate_q(pair, n, seed, r); });
  return summarize(values);
}

McEstimate estimate_qn_serial(const PairModel& pair, std::size_t n, std::size_t replicates, std::uint64_t seed) {
  require_replicates(replicates);
  const auto values = map_replicates_serial(replicates, [&](std::size_t r) { return replicate_q(pair, n, seed, r); });
  return summarize(values);
}

McEstimate estimate_mad(const PairModel& pair, const Integrand& f, std::size_t n, std::size_t replicates,
                        double exact_I, std::uint64_t seed) {
  require_replicates(replicates);
  const auto values =
      map_replicates(replicates, [&](std::size_t r) { return replicate_abs_error(pair, f, n, exact_I, seed, r); });
  return summarize(values);
}

McEstimate estimate_mad_serial(const PairModel& pair, const Integrand& f, std::size_t n, std::size_t replicates,
                               double exact_I, std::uint64_t seed) {
  require_replicates(replicates);
  const auto values = map_replicates_serial(
      replicates, [&](std::size_t r) { return replicate_abs_error(pair, f, n, exact_I, seed, r); });
  return summarize(values);
}

}  // namespace isamp
