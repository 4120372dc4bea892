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

#include "isamp/rare_event.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "isamp/errors.hpp"
#include "isamp/logspace.hpp"
#include "isamp/parallel.hpp"
#include "isamp/rng.hpp"

namespace isamp {
namespace {

void require_range(int N, int k) {
  if (N < 0 || k < 0 || k > N) {
    throw DomainError(fmt::format("need 0 <= k <= N, got N = {}, k = {}", N, k));
  }
}

mpz_class choose(int n, int k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

mpz_class pow2(int n) {
  mpz_class out;
  mpz_ui_pow_ui(out.get_mpz_t(), 2, static_cast<unsigned long>(n));
  return out;
}

/// Natural log of a positive big integer.
double log_mpz(const mpz_class& z) {
  long exponent = 0;
  const double mantissa = mpz_get_d_2exp(&exponent, z.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
}

mpz_class tail_count(int N, int k) {
  mpz_class sum = 0;
  mpz_class c = choose(N, k);
  for (int j = k; j <= N; ++j) {
    sum += c;
    c = c * (N - j) / (j + 1);
  }
  return sum;
}

/// log sum_{j >= k} C(N, j), exact for moderate N.
double log_tail_count(int N, int k) {
  if (N <= kMaxExactTrials) {
    return log_mpz(tail_count(N, k));
  }
  LogSumExp acc;
  for (int j = k; j <= N; ++j) {
    acc.add(log_choose(N, j));
  }
  return acc.value();
}

void require_tilt(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError(fmt::format("theta must lie in (0, 1), got {}", theta));
  }
}

int threshold_of(int N, double p) { return RareBinomialSpec{N, p, 0.5}.threshold(); }

/// log rho(j) = log nu(j) - log mu_theta(j); the binomial coefficients cancel.
double log_weight(int N, int j, double theta) {
  return -N * std::numbers::ln2 - j * std::log(theta) - (N - j) * std::log1p(-theta);
}

RareRun run_one(const RareBinomialSpec& spec, int k, double log_z, std::size_t n, Rng rng) {
  LogSumExp acc;
  RareRun out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = static_cast<int>(rng.binomial(spec.N, spec.theta));
    if (j >= k) {
      ++out.hits;
      acc.add(log_weight(spec.N, j, spec.theta));
    }
  }
  const double log_estimate = acc.value() - std::log(static_cast<double>(n));
  out.estimate = std::exp(log_estimate);
  out.ratio = std::exp(log_estimate - log_z);
  return out;
}

void require_draws(std::size_t n) {
  if (n == 0) {
    throw DomainError("need at least one draw");
  }
}

}  // namespace

int RareBinomialSpec::threshold() const {
  if (N < 1) {
    throw DomainError("N must be positive");
  }
  if (!(p > 0.5 && p < 1.0)) {
    throw DomainError(fmt::format("p must lie in (1/2, 1), got {}", p));
  }
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError(fmt::format("theta must lie in (0, 1), got {}", theta));
  }
  const double np = N * p;
  const double k = std::round(np);
  if (std::abs(np - k) > 1e-9 * std::max(1.0, np)) {
    throw DomainError(fmt::format("N p must be an integer, got {}", np));
  }
  return static_cast<int>(k);
}

BinomTail binom_tail(int N, int k) {
  require_range(N, k);
  BinomTail out;
  if (N <= kMaxExactTrials) {
    const mpz_class count = tail_count(N, k);
    out.exact = mpq_class(count, pow2(N));
    out.exact->canonicalize();
    out.value = out.exact->get_d();
    out.log_value = log_mpz(count) - N * std::numbers::ln2;
    return out;
  }
  out.log_value = log_tail_count(N, k) - N * std::numbers::ln2;
  out.value = std::exp(out.log_value);
  return out;
}

mpq_class binom_point_exact(int N, int k) {
  require_range(N, k);
  mpq_class out(choose(N, k), pow2(N));
  out.canonicalize();
  return out;
}

DeMoivreCheck de_moivre_identity(int N, int k) {
  require_range(N, k);
  DeMoivreCheck out;
  // Work in halves so N/2 stays integral.
  mpz_class sum = 0;
  for (int j = k; j <= N; ++j) {
    sum += choose(N, j) * (2 * j - N);
  }
  out.lhs = mpq_class(sum, 2 * pow2(N));
  out.lhs.canonicalize();
  out.rhs = mpq_class(k, 2) * binom_point_exact(N, k);
  out.rhs.canonicalize();
  out.equal = out.lhs == out.rhs;
  return out;
}

BahadurBracket bahadur_bracket(int N, double p) {
  const int k = threshold_of(N, p);
  // Np + 1 - (N + 1)/2 in halves.
  const int twice_denominator = 2 * k + 1 - N;
  if (twice_denominator <= 0) {
    throw DomainError(fmt::format("Np + 1 - (N + 1)/2 must be positive (N = {}, p = {})", N, p));
  }
  const mpq_class z(tail_count(N, k), pow2(N));
  mpq_class r = binom_point_exact(N, k) * (k + 1) / twice_denominator;
  r.canonicalize();
  const mpq_class ratio = r / z;

  BahadurBracket out;
  out.R = r.get_d();
  out.Z = z.get_d();
  out.ratio = ratio.get_d();
  out.x = (k - N / 2.0) / std::sqrt(N / 4.0);
  out.upper = 1.0 + 1.0 / (out.x * out.x);
  out.holds = ratio >= 1 && out.ratio <= out.upper;
  return out;
}

double rare_LA(int N, double p, double theta, LaMode mode) {
  const int k = threshold_of(N, p);
  if (mode == LaMode::Asymptotic) {
    return -2.0 * N * (p * std::log(p) + (1.0 - p) * std::log1p(-p));
  }
  require_tilt(theta);
  const double log_count = log_tail_count(N, k);
  if (mode == LaMode::ExactDirect) {
    double sum = 0.0;
    for (int j = k; j <= N; ++j) {
      const double log_nu_a = log_choose(N, j) - log_count;
      const double log_mu = log_choose(N, j) + j * std::log(theta) + (N - j) * std::log1p(-theta);
      sum += std::exp(log_nu_a) * (log_nu_a - log_mu);
    }
    return sum;
  }
  // b(Np; N, 1/2) / Z, exactly when possible.
  double point_over_tail = 0.0;
  if (N <= kMaxExactTrials) {
    point_over_tail = mpq_class(choose(N, k), tail_count(N, k)).get_d();
  } else {
    point_over_tail = std::exp(log_choose(N, k) - log_count);
  }
  const double log_scaled_z = log_count + N * std::log1p(-theta);  // log(2^N Z (1-theta)^N)
  const double logit = std::log(theta) - std::log1p(-theta);
  return -log_scaled_z - logit * (N * p / 2.0 * point_over_tail + N / 2.0);
}

double optimal_tilt(int N, double p, double grid_step) {
  if (!(grid_step > 0.0 && grid_step < 0.25)) {
    throw DomainError(fmt::format("grid step must lie in (0, 0.25), got {}", grid_step));
  }
  double best_theta = 0.5 + grid_step;
  double best = kInf;
  const auto steps = static_cast<int>(std::floor((0.5 - grid_step) / grid_step));
  for (int i = 1; i < steps; ++i) {
    const double theta = 0.5 + i * grid_step;
    const double la = rare_LA(N, p, theta, LaMode::ExactDirect);
    if (la < best) {
      best = la;
      best_theta = theta;
    }
  }
  return best_theta;
}

TailModel rare_conditional_tail(const RareBinomialSpec& spec) {
  const int k = spec.threshold();
  require_tilt(spec.theta);
  const double log_count = log_tail_count(spec.N, k);
  std::vector<std::pair<double, double>> law;
  law.reserve(static_cast<std::size_t>(spec.N - k + 1));
  for (int j = k; j <= spec.N; ++j) {
    const double log_nu_a = log_choose(spec.N, j) - log_count;
    const double log_mu = log_choose(spec.N, j) + j * std::log(spec.theta) + (spec.N - j) * std::log1p(-spec.theta);
    law.emplace_back(log_nu_a - log_mu, std::exp(log_nu_a));
  }
  return TailModel::exact(std::move(law));
}

double rare_is_expectation(const RareBinomialSpec& spec) {
  const int k = spec.threshold();
  require_tilt(spec.theta);
  double sum = 0.0;
  for (int j = 0; j <= spec.N; ++j) {
    if (j < k) {
      continue;  // the indicator kills the term
    }
    const double log_mu = log_choose(spec.N, j) + j * std::log(spec.theta) + (spec.N - j) * std::log1p(-spec.theta);
    sum += std::exp(log_mu + log_weight(spec.N, j, spec.theta));
  }
  return sum;
}

RareRun rare_is_run(const RareBinomialSpec& spec, std::size_t n, std::uint64_t seed) {
  const int k = spec.threshold();
  require_tilt(spec.theta);
  require_draws(n);
  return run_one(spec, k, binom_tail(spec.N, k).log_value, n, Rng{seed});
}

std::vector<RareRun> rare_is_replicates(const RareBinomialSpec& spec, std::size_t n, std::size_t replicates,
                                        std::uint64_t seed) {
  const int k = spec.threshold();
  require_tilt(spec.theta);
  require_draws(n);
  const double log_z = binom_tail(spec.N, k).log_value;
  return map_replicates(replicates, [&](std::size_t r) { return run_one(spec, k, log_z, n, Rng::stream(seed, r)); });
}

std::vector<RareRun> rare_is_replicates_serial(const RareBinomialSpec& spec, std::size_t n, std::size_t replicates,
                                               std::uint64_t seed) {
  const int k = spec.threshold();
  require_tilt(spec.theta);
  require_draws(n);
  const double log_z = binom_tail(spec.N, k).log_value;
  return map_replicates_serial(replicates,
                               [&](std::size_t r) { return run_one(spec, k, log_z, n, Rng::stream(seed, r)); });
}

}  // namespace isamp
