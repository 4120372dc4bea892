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

#include "isamp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "isamp/errors.hpp"
#include "isamp/parallel.hpp"
#include "isamp/rng.hpp"

namespace isamp {
namespace {

constexpr double kSolverTolerance = 1e-9;
constexpr double kMaxSlack = 1e12;
constexpr double kMaxLinearLogN = 700.0;

double clamp_kl(double v) { return std::max(v, 0.0); }

struct BinomialLogRho {
  double up;    // log(p1 / p0)
  double down;  // log((1 - p1) / (1 - p0))
};

BinomialLogRho binomial_log_rho(const BinomialFamily& b) {
  return {std::log(b.target_p / b.proposal_p), std::log1p(-b.target_p) - std::log1p(-b.proposal_p)};
}

/// Shared form of the Theorem-1 style upper and lower bounds (f_norm applied by the caller).
double upper_core(double L, double t, const TailModel& tail) {
  return std::exp(-t / 4.0) + 2.0 * std::sqrt(tail.probability(L + t / 2.0, TailSide::Above));
}

double lower_core(double L, double t, double delta, const TailModel& tail) {
  const double v = std::exp(-t / 2.0) + tail.probability(L - t / 2.0, TailSide::AtOrBelow) / (1.0 - delta);
  return std::clamp(v, 0.0, 1.0);
}

void require_slack(double t) {
  if (!(t >= 0.0)) {
    throw DomainError(fmt::format("slack t must be non-negative, got {}", t));
  }
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError(fmt::format("delta must lie in (0, 1), got {}", delta));
  }
}

}  // namespace

TailModel TailModel::from_table(Kind kind, std::vector<std::pair<double, double>> law) {
  std::sort(law.begin(), law.end());
  auto table = std::make_shared<Table>();
  std::vector<double> masses;
  for (const auto& [value, mass] : law) {
    if (mass <= 0.0) {
      continue;
    }
    if (!table->values.empty() && table->values.back() == value) {
      masses.back() += mass;
    } else {
      table->values.push_back(value);
      masses.push_back(mass);
    }
  }
  const std::size_t m = masses.size();
  table->above_from.assign(m, 0.0);
  table->below_to.assign(m, 0.0);
  double acc = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    acc += masses[i];
    table->above_from[i] = acc;
  }
  acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    acc += masses[i];
    table->below_to[i] = acc;
  }
  TailModel model;
  model.kind_ = kind;
  model.table_ = std::move(table);
  return model;
}

TailModel TailModel::exact(const PairModel& pair) {
  const Enumeration e = enumerate_pair(pair);
  std::vector<std::pair<double, double>> law;
  law.reserve(e.rows.size());
  for (const auto& row : e.rows) {
    if (row.nu_mass > 0.0) {
      law.emplace_back(row.log_rho, row.nu_mass);
    }
  }
  return from_table(Kind::ExactEnumeration, std::move(law));
}

TailModel TailModel::exact(std::vector<std::pair<double, double>> law) {
  return from_table(Kind::ExactEnumeration, std::move(law));
}

TailModel TailModel::closed_form(TailFn above, TailFn at_or_below) {
  TailModel model;
  model.kind_ = Kind::ClosedForm;
  model.above_ = std::move(above);
  model.at_or_below_ = std::move(at_or_below);
  return model;
}

TailModel TailModel::normal(double mean, double sd) {
  if (!(sd >= 0.0)) {
    throw DomainError("normal tail needs a non-negative standard deviation");
  }
  TailModel model;
  model.kind_ = Kind::NormalApprox;
  model.mean_ = mean;
  model.sd_ = sd;
  return model;
}

TailModel TailModel::monte_carlo(const PairModel& pair, std::size_t samples, std::uint64_t seed) {
  if (!pair.has_target_sampler()) {
    throw UnsupportedError(fmt::format("pair '{}' has no target sampler", pair.name()));
  }
  Rng rng{seed};
  const double mass = 1.0 / static_cast<double>(samples);
  std::vector<std::pair<double, double>> law;
  law.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    law.emplace_back(pair.log_weight(pair.sample_target(rng)) + pair.log_constant(), mass);
  }
  return from_table(Kind::MonteCarlo, std::move(law));
}

double TailModel::probability(double c, TailSide side) const {
  switch (kind_) {
    case Kind::ExactEnumeration:
    case Kind::MonteCarlo: {
      const auto& v = table_->values;
      const auto idx = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), c) - v.begin());
      if (side == TailSide::Above) {
        return idx == v.size() ? 0.0 : std::min(table_->above_from[idx], 1.0);
      }
      return idx == 0 ? 0.0 : std::min(table_->below_to[idx - 1], 1.0);
    }
    case Kind::ClosedForm:
      return std::clamp(side == TailSide::Above ? above_(c) : at_or_below_(c), 0.0, 1.0);
    case Kind::NormalApprox: {
      if (sd_ == 0.0) {
        return (side == TailSide::Above) == (mean_ > c) ? 1.0 : 0.0;
      }
      const double z = (c - mean_) / sd_;
      return side == TailSide::Above ? normal_upper_tail(z) : normal_cdf(z);
    }
  }
  return 0.0;
}

KlResult kl_divergence(const PairModel& pair, KlMethod method, std::size_t mc_samples, std::uint64_t mc_seed) {
  switch (method) {
    case KlMethod::ExactEnumeration: {
      const Enumeration e = enumerate_pair(pair);
      double total = 0.0;
      for (const auto& row : e.rows) {
        if (row.nu_mass > 0.0) {
          total += row.nu_mass * row.log_rho;
        }
      }
      return {clamp_kl(total), std::nullopt};
    }
    case KlMethod::ClosedForm: {
      const PairFamily& fam = pair.family();
      if (std::holds_alternative<IdentityFamily>(fam)) {
        return {0.0, std::nullopt};
      }
      if (const auto* e = std::get_if<ExponentialFamily>(&fam)) {
        const double a = e->proposal_mean;
        const double b = e->target_mean;
        return {clamp_kl(std::log(a / b) + b / a - 1.0), std::nullopt};
      }
      if (const auto* b = std::get_if<BinomialFamily>(&fam)) {
        const auto [up, down] = binomial_log_rho(*b);
        const double p1 = b->target_p;
        return {clamp_kl(static_cast<double>(b->trials) * (p1 * up + (1.0 - p1) * down)), std::nullopt};
      }
      if (const auto* c = std::get_if<CounterexampleFamily>(&fam)) {
        const auto n = static_cast<double>(c->size);
        const double v = (n - 1.0) / (2.0 * n) * -std::numbers::ln2 + (n + 1.0) / (2.0 * n) * std::log((n + 1.0) / 2.0);
        return {clamp_kl(v), std::nullopt};
      }
      break;
    }
    case KlMethod::MonteCarlo: {
      if (!pair.has_target_sampler()) {
        throw UnsupportedError(fmt::format("pair '{}' has no target sampler", pair.name()));
      }
      Rng rng{mc_seed};
      std::vector<double> values(mc_samples);
      for (auto& v : values) {
        v = pair.log_weight(pair.sample_target(rng)) + pair.log_constant();
      }
      const McEstimate est = summarize(values);
      return {clamp_kl(est.mean), est.std_error};
    }
  }
  throw UnsupportedError(fmt::format("no closed-form KL divergence for pair '{}'", pair.name()));
}

LogRhoMoments logrho_moments(const PairModel& pair) {
  if (pair.is_enumerable()) {
    const Enumeration e = enumerate_pair(pair);
    double mean = 0.0;
    for (const auto& row : e.rows) {
      if (row.nu_mass > 0.0) {
        mean += row.nu_mass * row.log_rho;
      }
    }
    double var = 0.0;
    for (const auto& row : e.rows) {
      if (row.nu_mass > 0.0) {
        var += row.nu_mass * (row.log_rho - mean) * (row.log_rho - mean);
      }
    }
    return {mean, std::sqrt(var)};
  }
  const PairFamily& fam = pair.family();
  if (const auto* e = std::get_if<ExponentialFamily>(&fam)) {
    const double slope = 1.0 / e->proposal_mean - 1.0 / e->target_mean;
    return {kl_divergence(pair, KlMethod::ClosedForm).value, std::abs(slope) * e->target_mean};
  }
  if (const auto* b = std::get_if<BinomialFamily>(&fam)) {
    const auto [up, down] = binomial_log_rho(*b);
    const auto n = static_cast<double>(b->trials);
    const double p1 = b->target_p;
    return {n * (p1 * up + (1.0 - p1) * down), std::sqrt(n * p1 * (1.0 - p1)) * std::abs(up - down)};
  }
  throw UnsupportedError(fmt::format("no closed-form log-rho moments for pair '{}'", pair.name()));
}

TailModel tail_model_for(const PairModel& pair) {
  if (pair.is_enumerable()) {
    return TailModel::exact(pair);
  }
  if (const auto* e = std::get_if<ExponentialFamily>(&pair.family())) {
    // log rho(y) = log(a/b) + s y with Y ~ Exp(mean b).
    const double a = e->proposal_mean;
    const double b = e->target_mean;
    const double offset = std::log(a / b);
    const double slope = 1.0 / a - 1.0 / b;
    auto survival = [b](double y) { return y <= 0.0 ? 1.0 : std::exp(-y / b); };
    auto above = [=](double c) {
      if (slope == 0.0) {
        return offset > c ? 1.0 : 0.0;
      }
      const double y = (c - offset) / slope;
      return slope > 0.0 ? survival(y) : 1.0 - survival(y);
    };
    return TailModel::closed_form(above, [above](double c) { return 1.0 - above(c); });
  }
  const LogRhoMoments m = logrho_moments(pair);
  return TailModel::normal(m.mean, m.sd);
}

double logrho_tail(const TailModel& tail, double c, TailSide side) { return tail.probability(c, side); }

double thm1_bound(const BoundQuery& q, const TailModel& tail) {
  require_slack(q.t);
  if (q.side == BoundSide::Upper) {
    return q.f_norm * upper_core(q.L, q.t, tail);
  }
  require_delta(q.delta);
  return lower_core(q.L, q.t, q.delta, tail);
}

SelfNormalizedBound thm2_bound(const BoundQuery& q, const TailModel& tail) {
  require_slack(q.t);
  SelfNormalizedBound out;
  out.epsilon = std::sqrt(upper_core(q.L, q.t, tail));
  out.deviation_threshold = out.epsilon < 1.0 ? 2.0 * q.f_norm * out.epsilon / (1.0 - out.epsilon) : kInf;
  out.probability = std::min(2.0 * out.epsilon, 1.0);
  return out;
}

double thm3_bound(double L_A, double t, const TailModel& conditional_tail, double delta, BoundSide side) {
  require_slack(t);
  if (side == BoundSide::Upper) {
    return upper_core(L_A, t, conditional_tail);
  }
  require_delta(delta);
  return lower_core(L_A, t, delta, conditional_tail);
}

LogScaleValue exact_variance(const PairModel& pair, const Integrand& f) {
  if (pair.is_enumerable()) {
    const Enumeration e = enumerate_pair(pair);
    LogSumExp second;
    double integral = 0.0;
    for (const auto& row : e.rows) {
      if (row.nu_mass <= 0.0) {
        continue;
      }
      const double v = f(row.point);
      integral += v * row.nu_mass;
      if (v != 0.0) {
        second.add(2.0 * std::log(std::abs(v)) + row.log_rho + std::log(row.nu_mass));
      }
    }
    const double log_square = integral == 0.0 ? kNegInf : 2.0 * std::log(std::abs(integral));
    return {log_sub(second.value(), log_square)};
  }
  const PairFamily& fam = pair.family();
  if (const auto* e = std::get_if<ExponentialFamily>(&fam)) {
    // rho * nu density = (a / b^2) exp(-y (2/b - 1/a)).
    const double a = e->proposal_mean;
    const double b = e->target_mean;
    const double rate = 2.0 / b - 1.0 / a;
    if (rate <= 0.0) {
      return {kInf};
    }
    if (f.kind == Integrand::Kind::One) {
      return {log_sub(std::log(a / (b * b * rate)), 0.0)};
    }
    if (f.kind == Integrand::Kind::Identity) {
      return {log_sub(std::log(2.0 * a / (b * b * rate * rate * rate)), 2.0 * std::log(b))};
    }
  }
  if (const auto* b = std::get_if<BinomialFamily>(&fam)) {
    if (f.kind == Integrand::Kind::One) {
      // E_nu rho = (p1^2 / p0 + (1 - p1)^2 / (1 - p0))^N.
      const double p0 = b->proposal_p;
      const double p1 = b->target_p;
      const double g = p1 * p1 / p0 + (1.0 - p1) * (1.0 - p1) / (1.0 - p0);
      return {log_sub(static_cast<double>(b->trials) * std::log(g), 0.0)};
    }
  }
  throw UnsupportedError(fmt::format("no exact variance of '{}' under pair '{}'", f.name, pair.name()));
}

SampleSizePlan required_sample_size(double L, double f_norm, const TailModel& tail, double target_error) {
  if (!(target_error > 0.0)) {
    throw DomainError("target error must be positive");
  }
  auto bound = [&](double t) { return f_norm * upper_core(L, t, tail); };
  SampleSizePlan plan;
  if (bound(0.0) <= target_error) {
    plan.t = 0.0;
  } else {
    double lo = 0.0;
    double hi = 1.0;
    while (bound(hi) > target_error) {
      lo = hi;
      hi *= 2.0;
      if (hi > kMaxSlack) {
        throw NoSolutionError(fmt::format("the upper bound stays above {} for every slack", target_error));
      }
    }
    while (hi - lo > kSolverTolerance) {
      const double mid = 0.5 * (lo + hi);
      (bound(mid) <= target_error ? hi : lo) = mid;
    }
    plan.t = hi;
  }
  plan.log_n = L + plan.t;
  if (plan.log_n <= kMaxLinearLogN) {
    plan.n = std::exp(plan.log_n);
  }
  return plan;
}

double flaw_bound(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("epsilon must be positive");
  }
  const double log_e = -2.0 * std::log(epsilon) + (1.0 + std::pow(epsilon, -3.0)) * std::numbers::ln2;
  return log_e / std::numbers::ln10;
}

double qn_necessity_bound(double epsilon_n, double n) {
  if (!(epsilon_n > 0.0 && epsilon_n < 1.0)) {
    throw DomainError("epsilon_n must lie in (0, 1)");
  }
  if (!(n >= 1.0)) {
    throw DomainError("n must be at least 1");
  }
  const double l = std::log(1.0 / epsilon_n);
  return std::max(1.0 / n, std::log(l) / l);
}

}  // namespace isamp
