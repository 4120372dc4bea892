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

#include "isamp/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <fmt/format.h>

#include "isamp/errors.hpp"
#include "isamp/logspace.hpp"

namespace isamp {
namespace {

constexpr double kMassTolerance = 1e-12;

/// Inverse-CDF sampler over a finite table of points.
PairModel::Sampler table_sampler(std::vector<double> points, const std::vector<double>& masses) {
  auto cdf = std::make_shared<std::vector<double>>(masses.size());
  double running = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    running += masses[i];
    (*cdf)[i] = running;
  }
  auto shared_points = std::make_shared<const std::vector<double>>(std::move(points));
  return [cdf, shared_points](Rng& rng) {
    const double u = rng.uniform() * cdf->back();
    auto it = std::upper_bound(cdf->begin(), cdf->end(), u);
    if (it == cdf->end()) {
      --it;
    }
    return (*shared_points)[static_cast<std::size_t>(it - cdf->begin())];
  };
}

bool is_integer_in(double x, double lo, double hi) { return x >= lo && x <= hi && std::floor(x) == x; }

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError(fmt::format("{} must lie in (0, 1), got {}", what, p));
  }
}

double binomial_log_pmf(std::int64_t n, std::int64_t k, double p) {
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  return log_choose(nd, kd) + kd * std::log(p) + (nd - kd) * std::log1p(-p);
}

}  // namespace

double PairModel::sample_proposal(Rng& rng) const {
  if (!parts_.proposal_sampler) {
    throw UnsupportedError(fmt::format("pair '{}' is analytic only and cannot be sampled", parts_.name));
  }
  return parts_.proposal_sampler(rng);
}

double PairModel::sample_target(Rng& rng) const {
  if (!parts_.target_sampler) {
    throw UnsupportedError(fmt::format("pair '{}' has no target sampler", parts_.name));
  }
  return parts_.target_sampler(rng);
}

PairModel PairModel::with_unknown_constant(double log_c) const {
  Parts copy = parts_;
  copy.name += "-unnormalized";
  copy.normalization = Normalization::UnnormalizedWithUnknownConstant;
  copy.log_constant = log_c;
  return PairModel{std::move(copy)};
}

Enumeration enumerate_pair(const PairModel& pair) {
  if (!pair.is_enumerable()) {
    throw UnsupportedError(fmt::format("pair '{}' does not have a finite enumerable support", pair.name()));
  }
  Enumeration out;
  out.rows.reserve(pair.atom_count());
  for (std::size_t i = 0; i < pair.atom_count(); ++i) {
    const Atom a = pair.atom(i);
    if (a.log_mu == kNegInf && a.log_nu != kNegInf) {
      throw DomainError(fmt::format("pair '{}': nu has mass at {} where mu has none", pair.name(), a.point));
    }
    const double mu = std::exp(a.log_mu);
    const double nu = std::exp(a.log_nu);
    const double log_rho = a.log_mu == kNegInf ? kNegInf : a.log_nu - a.log_mu;
    out.rows.push_back({a.point, mu, nu, log_rho});
    out.mu_total += mu;
    out.nu_total += nu;
    if (log_rho != kNegInf) {
      out.rho_mu_total += std::exp(log_rho) * mu;
    }
  }
  out.normalized_within_tolerance = std::abs(out.mu_total - 1.0) <= kMassTolerance &&
                                    std::abs(out.nu_total - 1.0) <= kMassTolerance &&
                                    std::abs(out.rho_mu_total - 1.0) <= kMassTolerance;
  return out;
}

PairModel identity_pair(std::vector<double> points, std::vector<double> masses) {
  if (points.size() != masses.size() || points.empty()) {
    throw UsageError("identity pair needs one mass per point");
  }
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  std::vector<double> sorted_points;
  std::vector<double> sorted_masses;
  for (const std::size_t i : order) {
    if (!(masses[i] > 0.0)) {
      throw DomainError("identity pair masses must be positive");
    }
    sorted_points.push_back(points[i]);
    sorted_masses.push_back(masses[i]);
  }
  auto pts = std::make_shared<const std::vector<double>>(sorted_points);
  auto ms = std::make_shared<const std::vector<double>>(sorted_masses);

  PairModel::Parts parts;
  parts.name = "identity";
  parts.family = IdentityFamily{};
  parts.support = SupportKind::FiniteEnumerable;
  parts.log_weight = [pts](double x) {
    if (!std::binary_search(pts->begin(), pts->end(), x)) {
      throw DomainError(fmt::format("point {} is outside the support of mu", x));
    }
    return 0.0;
  };
  parts.proposal_sampler = table_sampler(sorted_points, sorted_masses);
  parts.target_sampler = parts.proposal_sampler;
  parts.atom_count = sorted_points.size();
  parts.atom_at = [pts, ms](std::size_t i) {
    const double lm = std::log((*ms)[i]);
    return Atom{(*pts)[i], lm, lm};
  };
  return PairModel{std::move(parts)};
}

PairModel identity_pair() { return identity_pair({0.0, 1.0}, {0.5, 0.5}); }

PairModel exponential_pair(double proposal_mean, double target_mean) {
  if (!(proposal_mean > 0.0 && target_mean > 0.0)) {
    throw DomainError("exponential means must be positive");
  }
  PairModel::Parts parts;
  parts.name = (proposal_mean == 1.0 && target_mean == 2.0) ? "exp12" : fmt::format("exp({},{})", proposal_mean, target_mean);
  parts.family = ExponentialFamily{proposal_mean, target_mean};
  parts.support = SupportKind::ClosedForm;
  const double log_ratio = std::log(proposal_mean / target_mean);
  const double slope = 1.0 / proposal_mean - 1.0 / target_mean;
  parts.log_weight = [log_ratio, slope](double x) {
    if (!(x >= 0.0) || std::isinf(x)) {
      throw DomainError(fmt::format("point {} is outside the support of mu", x));
    }
    return log_ratio + slope * x;
  };
  parts.proposal_sampler = [proposal_mean](Rng& rng) { return rng.exponential(proposal_mean); };
  parts.target_sampler = [target_mean](Rng& rng) { return rng.exponential(target_mean); };
  return PairModel{std::move(parts)};
}

PairModel exp12_pair() { return exponential_pair(1.0, 2.0); }

PairModel binomial_pair(std::int64_t trials, double proposal_p, double target_p) {
  if (trials < 1) {
    throw DomainError("binomial pair needs at least one trial");
  }
  require_probability(proposal_p, "proposal p");
  require_probability(target_p, "target p");
  PairModel::Parts parts;
  parts.name = fmt::format("binom({},{},{})", trials, proposal_p, target_p);
  parts.family = BinomialFamily{trials, proposal_p, target_p};
  parts.support = SupportKind::FiniteEnumerable;
  const double up = std::log(target_p / proposal_p);
  const double down = std::log1p(-target_p) - std::log1p(-proposal_p);
  const auto nd = static_cast<double>(trials);
  parts.log_weight = [up, down, nd](double x) {
    if (!is_integer_in(x, 0.0, nd)) {
      throw DomainError(fmt::format("point {} is outside the support of mu", x));
    }
    return x * up + (nd - x) * down;
  };
  std::vector<double> points(static_cast<std::size_t>(trials) + 1);
  std::vector<double> mu_masses(points.size());
  std::vector<double> nu_masses(points.size());
  for (std::int64_t k = 0; k <= trials; ++k) {
    const auto i = static_cast<std::size_t>(k);
    points[i] = static_cast<double>(k);
    mu_masses[i] = std::exp(binomial_log_pmf(trials, k, proposal_p));
    nu_masses[i] = std::exp(binomial_log_pmf(trials, k, target_p));
  }
  parts.proposal_sampler = table_sampler(points, mu_masses);
  parts.target_sampler = table_sampler(points, nu_masses);
  parts.atom_count = points.size();
  parts.atom_at = [trials, proposal_p, target_p](std::size_t i) {
    const auto k = static_cast<std::int64_t>(i);
    return Atom{static_cast<double>(k), binomial_log_pmf(trials, k, proposal_p), binomial_log_pmf(trials, k, target_p)};
  };
  return PairModel{std::move(parts)};
}

PairModel large_binomial_pair() {
  constexpr std::int64_t kTrials = 1'000'000;
  constexpr double kP0 = 0.5;
  constexpr double kP1 = 0.9;
  PairModel::Parts parts;
  parts.name = "large-binom";
  parts.family = BinomialFamily{kTrials, kP0, kP1};
  parts.support = SupportKind::ClosedForm;
  const double up = std::log(kP1 / kP0);
  const double down = std::log1p(-kP1) - std::log1p(-kP0);
  parts.log_weight = [up, down](double x) {
    if (!is_integer_in(x, 0.0, static_cast<double>(kTrials))) {
      throw DomainError(fmt::format("point {} is outside the support of mu", x));
    }
    return x * up + (static_cast<double>(kTrials) - x) * down;
  };
  return PairModel{std::move(parts)};
}

PairModel counterexample_pair(std::int64_t size) {
  if (size < 2) {
    throw DomainError("counterexample needs at least two points");
  }
  const auto nd = static_cast<double>(size);
  PairModel::Parts parts;
  parts.name = fmt::format("counterexample({})", size);
  parts.family = CounterexampleFamily{size};
  parts.support = SupportKind::FiniteEnumerable;
  const double low = -std::numbers::ln2;
  const double high = std::log((nd + 1.0) / 2.0);
  parts.log_weight = [nd, low, high](double x) {
    if (!is_integer_in(x, 1.0, nd)) {
      throw DomainError(fmt::format("point {} is outside the support of mu", x));
    }
    return x == nd ? high : low;
  };
  parts.proposal_sampler = [size](Rng& rng) { return static_cast<double>(rng.below(static_cast<std::uint64_t>(size)) + 1); };
  parts.target_sampler = [size, nd](Rng& rng) {
    if (rng.uniform() < (nd + 1.0) / (2.0 * nd)) {
      return nd;
    }
    return static_cast<double>(rng.below(static_cast<std::uint64_t>(size - 1)) + 1);
  };
  parts.atom_count = static_cast<std::size_t>(size);
  parts.atom_at = [nd](std::size_t i) {
    const double x = static_cast<double>(i) + 1.0;
    const double log_mu = -std::log(nd);
    const double log_nu = x == nd ? std::log((nd + 1.0) / (2.0 * nd)) : -std::log(2.0 * nd);
    return Atom{x, log_mu, log_nu};
  };
  return PairModel{std::move(parts)};
}

PairModel make_pair(std::string_view name, const std::map<std::string, double>& params) {
  auto param = [&](const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  if (name == "identity") {
    return identity_pair();
  }
  if (name == "exp12") {
    return exp12_pair();
  }
  if (name == "exp") {
    return exponential_pair(param("mu_mean", 1.0), param("nu_mean", 2.0));
  }
  if (name == "binom") {
    return binomial_pair(static_cast<std::int64_t>(param("N", 100)), param("p0", 0.5), param("p1", 0.55));
  }
  if (name == "large-binom") {
    return large_binomial_pair();
  }
  if (name == "counterexample") {
    return counterexample_pair(static_cast<std::int64_t>(param("N", 1e6)));
  }
  throw UsageError(fmt::format("unknown pair '{}'", name));
}

double exact_integral(const PairModel& pair, const Integrand& f) {
  if (pair.is_enumerable()) {
    double total = 0.0;
    for (std::size_t i = 0; i < pair.atom_count(); ++i) {
      const Atom a = pair.atom(i);
      total += f(a.point) * std::exp(a.log_nu);
    }
    return total;
  }
  if (f.kind == Integrand::Kind::One) {
    return 1.0;
  }
  if (f.kind == Integrand::Kind::Identity) {
    if (const auto* e = std::get_if<ExponentialFamily>(&pair.family())) {
      return e->target_mean;
    }
    if (const auto* b = std::get_if<BinomialFamily>(&pair.family())) {
      return static_cast<double>(b->trials) * b->target_p;
    }
  }
  throw UnsupportedError(fmt::format("no exact integral of '{}' under pair '{}'", f.name, pair.name()));
}

double l2_norm(const PairModel& pair, const Integrand& f) {
  if (pair.is_enumerable()) {
    double total = 0.0;
    for (std::size_t i = 0; i < pair.atom_count(); ++i) {
      const Atom a = pair.atom(i);
      const double v = f(a.point);
      total += v * v * std::exp(a.log_nu);
    }
    return std::sqrt(total);
  }
  if (f.kind == Integrand::Kind::One) {
    return 1.0;
  }
  if (f.kind == Integrand::Kind::Identity) {
    if (const auto* e = std::get_if<ExponentialFamily>(&pair.family())) {
      return std::numbers::sqrt2 * e->target_mean;
    }
    if (const auto* b = std::get_if<BinomialFamily>(&pair.family())) {
      const double m = static_cast<double>(b->trials) * b->target_p;
      return std::sqrt(m * (1.0 - b->target_p) + m * m);
    }
  }
  throw UnsupportedError(fmt::format("no exact L2 norm of '{}' under pair '{}'", f.name, pair.name()));
}

}  // namespace isamp
