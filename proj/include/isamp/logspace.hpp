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

#ifndef ISAMP_LOGSPACE_HPP
#define ISAMP_LOGSPACE_HPP

#include <cmath>
#include <limits>
#include <span>

namespace isamp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(e^a + e^b).
double log_add(double a, double b);

/// log(e^a - e^b) for a >= b; -inf when a == b.
double log_sub(double a, double b);

/// log(sum_i e^{x_i}); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> values);

/// log C(n, k) via lgamma; -inf outside 0 <= k <= n.
double log_choose(double n, double k);

/// P(Z > z) for a standard normal Z, accurate deep in the tail.
double normal_upper_tail(double z);

/// P(Z <= z) for a standard normal Z.
double normal_cdf(double z);

/**
 * Streaming log-sum-exp.
 *
 * Holds `max` and `sum` with the represented total being `sum * e^max`. Adding and merging are
 * exact up to rounding, in any order.
 */
class LogSumExp {
 public:
  void add(double log_value) {
    if (log_value == kNegInf) {
      return;
    }
    if (log_value <= max_) {
      sum_ += std::exp(log_value - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_value) + 1.0;
      max_ = log_value;
    }
  }

  void merge(const LogSumExp& other) {
    if (other.max_ == kNegInf) {
      return;
    }
    if (max_ == kNegInf) {
      *this = other;
      return;
    }
    if (other.max_ <= max_) {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    }
  }

  [[nodiscard]] double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }
  [[nodiscard]] double max() const { return max_; }
  [[nodiscard]] bool empty() const { return max_ == kNegInf; }
  /// Largest term over the total, e^{max - value()}; exactly 1/k for k equal terms.
  [[nodiscard]] double max_share() const { return 1.0 / sum_; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

}  // namespace isamp

#endif  // ISAMP_LOGSPACE_HPP
