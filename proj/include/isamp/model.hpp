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

#ifndef ISAMP_MODEL_HPP
#define ISAMP_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isamp/rng.hpp"

/**
 * \file
 * \brief Proposal/target pairs.
 *
 * A pair couples a proposal law mu (what is sampled) with a target law nu (what is integrated
 * against) through the log-density ratio log rho = log(dnu/dmu). All masses and weights are
 * natural-log values; linear scale appears only at report boundaries.
 */

namespace isamp {

enum class Normalization {
  Normalized,                      ///< log_weight returns log rho.
  UnnormalizedWithUnknownConstant  ///< log_weight returns log tau with rho = C * tau.
};

enum class SupportKind { FiniteEnumerable, ClosedForm, SimulationOnly };

/// A drawn point and its log-weight.
struct SamplePoint {
  double value = 0.0;
  double cached_log_weight = 0.0;
};

/// One support point of a finite pair, masses in log scale.
struct Atom {
  double point = 0.0;
  double log_mu = 0.0;
  double log_nu = 0.0;
};

struct EnumerationRow {
  double point;
  double mu_mass;
  double nu_mass;
  double log_rho;
};

/// Result of `enumerate_pair`: the full support plus the normalization checks.
struct Enumeration {
  std::vector<EnumerationRow> rows;
  double mu_total = 0.0;
  double nu_total = 0.0;
  double rho_mu_total = 0.0;  ///< sum of rho * mu; equals 1 for normalized pairs.
  bool normalized_within_tolerance = false;
};

// Parameterized families; the bounds module derives closed forms from these.
struct IdentityFamily {};
struct ExponentialFamily {
  double proposal_mean;
  double target_mean;
};
struct BinomialFamily {
  std::int64_t trials;
  double proposal_p;
  double target_p;
};
struct CounterexampleFamily {
  std::int64_t size;
};
using PairFamily = std::variant<IdentityFamily, ExponentialFamily, BinomialFamily, CounterexampleFamily>;

/// Immutable proposal/target pair; safe to share across threads.
class PairModel {
 public:
  using Sampler = std::function<double(Rng&)>;
  using LogWeightFn = std::function<double(double)>;
  using AtomFn = std::function<Atom(std::size_t)>;

  struct Parts {
    std::string name;
    PairFamily family;
    Normalization normalization = Normalization::Normalized;
    SupportKind support = SupportKind::ClosedForm;
    LogWeightFn log_weight;
    Sampler proposal_sampler;
    Sampler target_sampler;
    std::size_t atom_count = 0;
    AtomFn atom_at;
    double log_constant = 0.0;
  };

  explicit PairModel(Parts parts) : parts_{std::move(parts)} {}

  [[nodiscard]] const std::string& name() const { return parts_.name; }
  [[nodiscard]] const PairFamily& family() const { return parts_.family; }
  [[nodiscard]] Normalization normalization() const { return parts_.normalization; }
  [[nodiscard]] SupportKind support() const { return parts_.support; }
  [[nodiscard]] bool is_enumerable() const { return parts_.support == SupportKind::FiniteEnumerable; }

  /// log rho(x) (log tau(x) when unnormalized). Throws DomainError outside the mu-support.
  [[nodiscard]] double log_weight(double x) const { return parts_.log_weight(x) - parts_.log_constant; }
  [[nodiscard]] double log_weight(const SamplePoint& x) const { return log_weight(x.value); }

  /// log C with rho = C * tau; zero for normalized pairs.
  [[nodiscard]] double log_constant() const { return parts_.log_constant; }

  [[nodiscard]] bool can_sample() const { return static_cast<bool>(parts_.proposal_sampler); }
  [[nodiscard]] bool has_target_sampler() const { return static_cast<bool>(parts_.target_sampler); }

  /// One draw from mu. Throws UnsupportedError for analytic-only pairs.
  [[nodiscard]] double sample_proposal(Rng& rng) const;
  /// One draw from nu. Throws UnsupportedError when no target sampler exists.
  [[nodiscard]] double sample_target(Rng& rng) const;
  /// One draw from mu with its log-weight attached.
  [[nodiscard]] SamplePoint draw(Rng& rng) const {
    const double x = sample_proposal(rng);
    return {x, log_weight(x)};
  }

  [[nodiscard]] std::size_t atom_count() const { return parts_.atom_count; }
  [[nodiscard]] Atom atom(std::size_t i) const { return parts_.atom_at(i); }

  /// Same pair, with weights reported as tau = rho / C.
  [[nodiscard]] PairModel with_unknown_constant(double log_c) const;

 private:
  Parts parts_;
};

/// Complete support listing with mass checks. Throws UnsupportedError for non-finite pairs and
/// DomainError when nu puts mass where mu has none.
Enumeration enumerate_pair(const PairModel& pair);

/// Identity pair mu = nu over a finite base.
PairModel identity_pair(std::vector<double> points, std::vector<double> masses);
/// Identity pair over {0, 1} with masses (1/2, 1/2).
PairModel identity_pair();
/// mu = Exp(mean proposal_mean), nu = Exp(mean target_mean).
PairModel exponential_pair(double proposal_mean, double target_mean);
/// mu = Exp(mean 1), nu = Exp(mean 2).
PairModel exp12_pair();
/// mu = Binomial(trials, proposal_p), nu = Binomial(trials, target_p).
PairModel binomial_pair(std::int64_t trials, double proposal_p, double target_p);
/// Binomial(10^6, .5) -> Binomial(10^6, .9); analytic only, never sampled.
PairModel large_binomial_pair();
/// mu uniform on {1..size}; nu puts 1/(2 size) on 1..size-1 and (size+1)/(2 size) on size.
PairModel counterexample_pair(std::int64_t size);

/// Builds a built-in pair by name: identity, exp12, binom, large-binom, counterexample.
/// Parameters: binom takes N, p0, p1; counterexample takes N. Unknown names throw UsageError.
PairModel make_pair(std::string_view name, const std::map<std::string, double>& params = {});

/// f in I(f) = int f dnu.
struct Integrand {
  enum class Kind { One, Identity, Custom };
  Kind kind = Kind::One;
  std::string name = "one";
  std::function<double(double)> fn;

  double operator()(double x) const {
    switch (kind) {
      case Kind::One:
        return 1.0;
      case Kind::Identity:
        return x;
      case Kind::Custom:
        break;
    }
    return fn(x);
  }

  static Integrand one() { return {}; }
  static Integrand identity() { return {Kind::Identity, "x", {}}; }
  static Integrand custom(std::string name, std::function<double(double)> f) {
    return {Kind::Custom, std::move(name), std::move(f)};
  }
};

/// Exact I(f) = E_nu f. Finite pairs by enumeration; other families only for built-in integrands.
double exact_integral(const PairModel& pair, const Integrand& f);
/// Exact ||f||_{L^2(nu)}.
double l2_norm(const PairModel& pair, const Integrand& f);

}  // namespace isamp

#endif  // ISAMP_MODEL_HPP
