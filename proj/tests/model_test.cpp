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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "isamp/errors.hpp"
#include "isamp/model.hpp"
#include "support/generators.hpp"

namespace isamp {
namespace {

std::vector<PairModel> builtin_finite_pairs() {
  return {identity_pair(), identity_pair({-1.0, 0.5, 3.0}, {0.2, 0.3, 0.5}), binomial_pair(100, 0.5, 0.55),
          binomial_pair(100, 0.5, 0.7), counterexample_pair(10), counterexample_pair(1000)};
}

TEST(LogWeight, IdentityIsZero) {
  const PairModel pair = identity_pair();
  EXPECT_EQ(pair.log_weight(0.0), 0.0);
  EXPECT_EQ(pair.log_weight(1.0), 0.0);
}

TEST(LogWeight, Exp12AtZero) { EXPECT_NEAR(exp12_pair().log_weight(0.0), -std::numbers::ln2, 1e-15); }

TEST(LogWeight, Exp12IsHalfExpHalfX) {
  const PairModel pair = exp12_pair();
  for (const double x : {0.1, 1.0, 7.5}) {
    EXPECT_NEAR(pair.log_weight(x), x / 2.0 - std::numbers::ln2, 1e-14);
  }
}

TEST(LogWeight, BinomialAtFifty) {
  EXPECT_NEAR(binomial_pair(100, 0.5, 0.55).log_weight(50.0), 50.0 * std::log(1.1) + 50.0 * std::log(0.9), 1e-12);
  EXPECT_NEAR(binomial_pair(100, 0.5, 0.55).log_weight(50.0), -0.50251679, 1e-8);
}

TEST(LogWeight, OutsideSupportThrows) {
  EXPECT_THROW((void)exp12_pair().log_weight(-1.0), DomainError);
  EXPECT_THROW((void)binomial_pair(10, 0.5, 0.6).log_weight(11.0), DomainError);
  EXPECT_THROW((void)binomial_pair(10, 0.5, 0.6).log_weight(2.5), DomainError);
  EXPECT_THROW((void)counterexample_pair(10).log_weight(0.0), DomainError);
  EXPECT_THROW((void)identity_pair().log_weight(0.5), DomainError);
}

TEST(LogWeight, CachedWeightMatches) {
  const PairModel pair = binomial_pair(20, 0.3, 0.6);
  Rng rng{4};
  for (int i = 0; i < 100; ++i) {
    const SamplePoint p = pair.draw(rng);
    EXPECT_EQ(p.cached_log_weight, pair.log_weight(p.value));
  }
}

TEST(Enumerate, IdentityTwoRows) {
  const Enumeration e = enumerate_pair(identity_pair());
  ASSERT_EQ(e.rows.size(), 2U);
  for (const auto& row : e.rows) {
    EXPECT_EQ(row.log_rho, 0.0);
    EXPECT_DOUBLE_EQ(row.mu_mass, 0.5);
  }
  EXPECT_TRUE(e.normalized_within_tolerance);
}

TEST(Enumerate, BinomialHundredOneRows) {
  const Enumeration e = enumerate_pair(binomial_pair(100, 0.5, 0.55));
  EXPECT_EQ(e.rows.size(), 101U);
  EXPECT_NEAR(e.rho_mu_total, 1.0, 1e-12);
  EXPECT_TRUE(e.normalized_within_tolerance);
}

TEST(Enumerate, CounterexampleTen) {
  const Enumeration e = enumerate_pair(counterexample_pair(10));
  ASSERT_EQ(e.rows.size(), 10U);
  for (std::size_t i = 0; i + 1 < e.rows.size(); ++i) {
    EXPECT_NEAR(e.rows[i].log_rho, -std::numbers::ln2, 1e-14);
  }
  EXPECT_NEAR(e.rows.back().log_rho, std::log(5.5), 1e-14);
  EXPECT_DOUBLE_EQ(e.rows.back().point, 10.0);
}

TEST(Enumerate, NonFiniteIsUnsupported) {
  EXPECT_THROW((void)enumerate_pair(exp12_pair()), UnsupportedError);
  EXPECT_THROW((void)enumerate_pair(large_binomial_pair()), UnsupportedError);
}

TEST(Enumerate, AbsoluteContinuityViolationDetected) {
  PairModel::Parts parts;
  parts.name = "broken";
  parts.family = IdentityFamily{};
  parts.support = SupportKind::FiniteEnumerable;
  parts.log_weight = [](double) { return 0.0; };
  parts.atom_count = 2;
  parts.atom_at = [](std::size_t i) {
    return i == 0 ? Atom{0.0, 0.0, std::log(0.5)} : Atom{1.0, kNegInf, std::log(0.5)};
  };
  EXPECT_THROW((void)enumerate_pair(PairModel{parts}), DomainError);
}

TEST(Pairs, AnalyticOnlyPairCannotSample) {
  Rng rng{1};
  const PairModel pair = large_binomial_pair();
  EXPECT_FALSE(pair.can_sample());
  EXPECT_THROW((void)pair.sample_proposal(rng), UnsupportedError);
}

TEST(Pairs, MakePairByName) {
  EXPECT_EQ(make_pair("identity").name(), "identity");
  EXPECT_EQ(make_pair("exp12").name(), "exp12");
  const PairModel b = make_pair("binom", {{"N", 20}, {"p0", 0.4}, {"p1", 0.6}});
  const auto* fam = std::get_if<BinomialFamily>(&b.family());
  ASSERT_NE(fam, nullptr);
  EXPECT_EQ(fam->trials, 20);
  EXPECT_EQ(make_pair("counterexample", {{"N", 7}}).atom_count(), 7U);
  EXPECT_THROW((void)make_pair("nope"), UsageError);
}

TEST(Pairs, UnknownConstantShiftsWeights) {
  const PairModel pair = binomial_pair(10, 0.5, 0.6);
  const PairModel shifted = pair.with_unknown_constant(3.0);
  EXPECT_EQ(shifted.normalization(), Normalization::UnnormalizedWithUnknownConstant);
  EXPECT_NEAR(shifted.log_weight(4.0), pair.log_weight(4.0) - 3.0, 1e-14);
}

TEST(Integrands, ExactIntegrals) {
  EXPECT_DOUBLE_EQ(exact_integral(exp12_pair(), Integrand::identity()), 2.0);
  EXPECT_NEAR(exact_integral(binomial_pair(100, 0.5, 0.55), Integrand::identity()), 55.0, 1e-10);
  EXPECT_NEAR(exact_integral(binomial_pair(100, 0.5, 0.55), Integrand::one()), 1.0, 1e-12);
  EXPECT_NEAR(l2_norm(exp12_pair(), Integrand::identity()), std::sqrt(8.0), 1e-12);
}

TEST(ModelProperty, RhoMuSumsToOne) {
  for (const auto& pair : builtin_finite_pairs()) {
    const Enumeration e = enumerate_pair(pair);
    EXPECT_NEAR(e.rho_mu_total, 1.0, 1e-12) << pair.name();
    EXPECT_TRUE(e.normalized_within_tolerance) << pair.name();
  }
  testing::Gen gen{202};
  for (std::size_t c = 0; c < testing::kPropertyCases; ++c) {
    const PairModel pair = gen.finite_pair();
    ASSERT_NEAR(enumerate_pair(pair).rho_mu_total, 1.0, 1e-12) << pair.name();
  }
}

TEST(ModelProperty, ClosedFormWeightMatchesEnumeration) {
  testing::Gen gen{203};
  std::vector<PairModel> pairs = builtin_finite_pairs();
  for (std::size_t c = 0; c < 50; ++c) {
    pairs.push_back(gen.finite_pair());
  }
  for (const auto& pair : pairs) {
    for (const auto& row : enumerate_pair(pair).rows) {
      if (row.nu_mass > 0.0) {
        ASSERT_NEAR(pair.log_weight(row.point), row.log_rho, 1e-10) << pair.name() << " at " << row.point;
      }
    }
  }
}

TEST(ModelProperty, ProposalFrequenciesMatchMasses) {
  constexpr int kDraws = 100000;
  for (const auto& pair : {identity_pair({-1.0, 0.5, 3.0}, {0.2, 0.3, 0.5}), binomial_pair(10, 0.3, 0.6),
                           counterexample_pair(8)}) {
    const Enumeration e = enumerate_pair(pair);
    std::vector<int> counts(e.rows.size(), 0);
    Rng rng{77};
    for (int i = 0; i < kDraws; ++i) {
      const double x = pair.sample_proposal(rng);
      for (std::size_t j = 0; j < e.rows.size(); ++j) {
        if (e.rows[j].point == x) {
          ++counts[j];
          break;
        }
      }
    }
    for (std::size_t j = 0; j < e.rows.size(); ++j) {
      const double p = e.rows[j].mu_mass;
      const double se = std::sqrt(p * (1.0 - p) / kDraws);
      EXPECT_NEAR(counts[j] / static_cast<double>(kDraws), p, 5.0 * se + 1e-12) << pair.name() << " row " << j;
    }
  }
}

}  // namespace
}  // namespace isamp
