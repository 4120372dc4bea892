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
#include "isamp/logspace.hpp"
#include "isamp/parallel.hpp"
#include "isamp/paths.hpp"
#include "support/generators.hpp"

namespace isamp {
namespace {

struct PathLawSums {
  double L = 0.0;  ///< sum over all paths of nu log rho
  std::vector<int> t_values;
};

/// Walks every up/right path to (n, n) and records its hitting time T.
PathLawSums enumerate_monotone(int n) {
  PathLawSums out;
  const int steps = 2 * n;
  const double log_paths = log_choose(steps, n);
  for (std::uint32_t mask = 0; mask < (1U << steps); ++mask) {
    if (__builtin_popcount(mask) != n) {
      continue;
    }
    int ups = 0;
    int rights = 0;
    int t = 0;
    for (int i = 0; i < steps; ++i) {
      ((mask >> i) & 1U) != 0U ? ++ups : ++rights;
      if (ups == n || rights == n) {
        t = i + 1;
        break;
      }
    }
    out.t_values.push_back(t);
    out.L += std::exp(-log_paths) * (t * std::numbers::ln2 - log_paths);
  }
  return out;
}

TEST(Monotone, SizeOneAlwaysHitsAtOnce) {
  Rng rng{1};
  for (int i = 0; i < 100; ++i) {
    const MonotonePathSample s = sample_monotone_path(1, rng);
    EXPECT_EQ(s.T, 1);
    EXPECT_NEAR(s.log_mu_prob, -std::numbers::ln2, 1e-15);
  }
}

TEST(Monotone, SizeTwoHittingTimeIsFair) {
  Rng rng{2};
  constexpr int kDraws = 100000;
  int twos = 0;
  for (int i = 0; i < kDraws; ++i) {
    twos += sample_monotone_path(2, rng).T == 2 ? 1 : 0;
  }
  EXPECT_NEAR(twos / static_cast<double>(kDraws), 0.5, 5.0 * std::sqrt(0.25 / kDraws));
}

TEST(Monotone, SampleFieldsConsistent) {
  Rng rng{3};
  for (int i = 0; i < 1000; ++i) {
    const MonotonePathSample s = sample_monotone_path(7, rng);
    ASSERT_GE(s.T, 7);
    ASSERT_LE(s.T, 13);
    ASSERT_DOUBLE_EQ(s.log_mu_prob, -s.T * std::numbers::ln2);
    ASSERT_NEAR(s.log_rho(), s.T * std::numbers::ln2 - log_choose(14, 7), 1e-12);
  }
}

TEST(Monotone, InvalidSize) {
  Rng rng{4};
  EXPECT_THROW((void)sample_monotone_path(0, rng), DomainError);
  EXPECT_THROW((void)monotone_L(0), DomainError);
}

TEST(TPmf, SizeTwo) {
  EXPECT_NEAR(t_pmf(2, 2, PathLaw::Mu), 0.5, 1e-15);
  EXPECT_NEAR(t_pmf(2, 3, PathLaw::Mu), 0.5, 1e-15);
  EXPECT_NEAR(t_pmf(2, 2, PathLaw::Nu), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(t_pmf(2, 3, PathLaw::Nu), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(t_pmf_exact(2, 3, PathLaw::Nu), mpq_class(2, 3));
}

TEST(TPmf, OutOfRangeIsZero) {
  EXPECT_EQ(t_pmf(5, 4, PathLaw::Mu), 0.0);
  EXPECT_EQ(t_pmf(5, 10, PathLaw::Nu), 0.0);
  EXPECT_EQ(t_pmf_exact(5, 10, PathLaw::Nu), 0);
}

TEST(TPmf, MatchesEnumeratedPaths) {
  for (int n = 1; n <= 6; ++n) {
    const PathLawSums sums = enumerate_monotone(n);
    std::vector<int> counts(static_cast<std::size_t>(2 * n), 0);
    for (const int t : sums.t_values) {
      ++counts[static_cast<std::size_t>(t)];
    }
    for (int j = n; j <= 2 * n - 1; ++j) {
      EXPECT_NEAR(t_pmf(n, j, PathLaw::Nu), counts[static_cast<std::size_t>(j)] / std::exp(log_choose(2 * n, n)), 1e-12);
    }
  }
}

TEST(TPmf, NuMeanExact) {
  for (const int n : {2, 10, 50}) {
    mpq_class mean = 0;
    for (int j = n; j <= 2 * n - 1; ++j) {
      mean += t_pmf_exact(n, j, PathLaw::Nu) * j;
    }
    const mpq_class expected = mpq_class(2 * n) - mpq_class(2 * n, n + 1);
    EXPECT_EQ(mean, expected) << "n=" << n;
  }
  EXPECT_EQ(mpq_class(8, 3), mpq_class(2 * 2) - mpq_class(4, 3));
}

TEST(TPmf, NuTailGeometric) {
  // nu{T = 2n-1} = n/(2n-1) exactly, so at n = 200 the k = 0 term sits 1.25e-3 above 1/2.
  EXPECT_NEAR(t_pmf(200, 399, PathLaw::Nu), 200.0 / 399.0, 1e-12);
  for (int k = 0; k <= 5; ++k) {
    EXPECT_NEAR(t_pmf(200, 399 - k, PathLaw::Nu), std::ldexp(1.0, -(k + 1)), 2e-3);
    EXPECT_NEAR(t_pmf(1000, 1999 - k, PathLaw::Nu), std::ldexp(1.0, -(k + 1)), 1e-3);
  }
}

TEST(TPmf, ExactAgreesWithFloating) {
  for (int n = 1; n <= 40; n += 3) {
    for (int j = n; j <= 2 * n - 1; ++j) {
      for (const auto law : {PathLaw::Mu, PathLaw::Nu}) {
        const double exact = t_pmf_exact(n, j, law).get_d();
        ASSERT_NEAR(t_pmf(n, j, law), exact, 1e-13 * exact);
      }
    }
  }
}

TEST(TPmf, LimitLawOfHittingTime) {
  // (2n - 1 - T)/sqrt(n) under mu tends to a law with CDF erf(x/2) = (1/sqrt(pi)) int_0^x e^{-y^2/4} dy.
  const int n = 10000;
  for (const double x : {0.5, 1.0, 2.0}) {
    double cdf = 0.0;
    for (int j = n; j <= 2 * n - 1; ++j) {
      if ((2.0 * n - 1.0 - j) / std::sqrt(n) <= x) {
        cdf += t_pmf(n, j, PathLaw::Mu);
      }
    }
    EXPECT_NEAR(cdf, std::erf(x / 2.0), 0.01) << "x=" << x;
  }
}

TEST(TPmf, SampledHittingTimeMatchesPmf) {
  const int n = 10;
  Rng rng{5};
  constexpr int kDraws = 100000;
  std::vector<double> z(kDraws);
  for (auto& v : z) {
    v = (2.0 * n - 1.0 - sample_monotone_path(n, rng).T) / std::sqrt(n);
  }
  for (const double x : {0.5, 1.0, 2.0}) {
    double exact = 0.0;
    for (int j = n; j <= 2 * n - 1; ++j) {
      if ((2.0 * n - 1.0 - j) / std::sqrt(n) <= x) {
        exact += t_pmf(n, j, PathLaw::Mu);
      }
    }
    double hits = 0.0;
    for (const double v : z) {
      hits += v <= x ? 1.0 : 0.0;
    }
    EXPECT_NEAR(hits / kDraws, exact, 5.0 * std::sqrt(exact * (1.0 - exact) / kDraws)) << "x=" << x;
  }
}

TEST(MonotoneLValues, Examples) {
  EXPECT_NEAR(monotone_L(1).exact, 0.0, 1e-15);
  EXPECT_NEAR(monotone_L(2).exact, -std::log(6.0) + 8.0 / 3.0 * std::numbers::ln2, 1e-14);
  EXPECT_NEAR(monotone_L(2).exact, 0.0566330123, 1e-10);
  EXPECT_NEAR(monotone_L(2).exact, enumerate_monotone(2).L, 1e-12);
  EXPECT_NEAR(monotone_L(10).exact, 0.4758846956, 1e-10);
  EXPECT_NEAR(monotone_L(10).asymptotic, 0.3373631283, 1e-10);
}

TEST(MonotoneLValues, Asymptotics) {
  const double n = 1e4;
  EXPECT_NEAR(std::exp(monotone_L(10000).exact) / (std::sqrt(std::numbers::pi * n) / 4.0), 1.000151, 1e-5);
}

TEST(MonotoneLValues, EqualsNuExpectationOfLogRho) {
  for (int n = 1; n <= 50; ++n) {
    double sum = 0.0;
    for (int j = n; j <= 2 * n - 1; ++j) {
      sum += t_pmf(n, j, PathLaw::Nu) * (j * std::numbers::ln2 - log_choose(2 * n, n));
    }
    ASSERT_NEAR(monotone_L(n).exact, sum, 1e-10) << "n=" << n;
  }
}

TEST(MonotoneProperty, MuPmfSumsToOne) {
  for (int n = 1; n <= 50; ++n) {
    double mu = 0.0;
    double nu = 0.0;
    for (int j = n; j <= 2 * n - 1; ++j) {
      mu += t_pmf(n, j, PathLaw::Mu);
      nu += t_pmf(n, j, PathLaw::Nu);
    }
    ASSERT_NEAR(mu, 1.0, 1e-12) << "n=" << n;
    ASSERT_NEAR(nu, 1.0, 1e-12) << "n=" << n;
  }
}

TEST(MonotoneProperty, WeightedMeanHittingTime) {
  const int n = 10;
  Rng rng{6};
  constexpr int kDraws = 100000;
  std::vector<double> w(kDraws);
  std::vector<double> t(kDraws);
  double sw = 0.0;
  double swt = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const MonotonePathSample s = sample_monotone_path(n, rng);
    w[i] = std::exp(s.log_rho());
    t[i] = s.T;
    sw += w[i];
    swt += w[i] * t[i];
  }
  const double mean = swt / sw;
  double spread = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    spread += w[i] * w[i] * (t[i] - mean) * (t[i] - mean);
  }
  const double se = std::sqrt(spread) / sw;
  EXPECT_NEAR(mean, (2.0 - 2.0 / (n + 1.0)) * n, 5.0 * se);
}

TEST(Saw, ExhaustiveCounts) {
  EXPECT_EQ(saw_enumerate(1).count, 2U);
  EXPECT_EQ(saw_enumerate(2).count, 12U);
  EXPECT_EQ(saw_enumerate(3).count, 184U);
  EXPECT_EQ(saw_enumerate(4).count, 8512U);
  EXPECT_EQ(saw_enumerate(5).count, 1262816U);
  EXPECT_THROW((void)saw_enumerate(6), ResourceError);
}

TEST(Saw, ExhaustiveStatistics) {
  const SawCount one = saw_enumerate(1);
  EXPECT_DOUBLE_EQ(one.mean_length, 2.0);
  EXPECT_DOUBLE_EQ(one.center_fraction, 1.0);  // the center of a 1x1 grid is the start corner
  const SawCount two = saw_enumerate(2);
  EXPECT_GT(two.center_fraction, 0.0);
  EXPECT_LT(two.center_fraction, 1.0);
}

TEST(Saw, DecisionTreeExpectationIsExactCount) {
  for (int m = 1; m <= 3; ++m) {
    EXPECT_EQ(saw_expected_weight(m), mpq_class(static_cast<unsigned long>(saw_enumerate(m).count))) << "m=" << m;
  }
}

TEST(Saw, SizeOneDraws) {
  Rng rng{7};
  for (int i = 0; i < 20; ++i) {
    const SawSample s = sample_saw(1, rng);
    EXPECT_TRUE(s.reached);
    EXPECT_EQ(s.length, 2);
    EXPECT_NEAR(s.log_weight, std::numbers::ln2, 1e-15);
  }
}

TEST(Saw, SizeTwoEstimate) {
  const SawEstimate e = saw_estimate(2, 100000, 42);
  EXPECT_NEAR(e.count, 12.0, 3.0 * e.count_std_error);
  EXPECT_GT(e.count_std_error, 0.0);
}

TEST(Saw, SizeThreeStatisticsMatchEnumeration) {
  const SawCount exact = saw_enumerate(3);
  const SawEstimate e = saw_estimate(3, 200000, 43);
  EXPECT_NEAR(e.count, 184.0, 4.0 * e.count_std_error);
  EXPECT_NEAR(e.mean_length, exact.mean_length, 0.05 * exact.mean_length);
  EXPECT_NEAR(e.center_fraction, exact.center_fraction, 0.05);
}

TEST(Saw, ParallelMatchesSerial) {
  const SawEstimate a = saw_estimate(6, 50000, 8);
  const SawEstimate b = saw_estimate_serial(6, 50000, 8);
  EXPECT_EQ(a.log_count, b.log_count);
  EXPECT_EQ(a.mean_length, b.mean_length);
  EXPECT_EQ(a.q_n, b.q_n);
}

TEST(Saw, QnAtThousandDrawsIsLarge) {
  const std::vector<std::size_t> grid{1000};
  const auto runs = map_replicates(31, [&](std::size_t t) { return saw_q_trajectory(10, grid, derive_seed(9, t)); });
  double mean = 0.0;
  for (const auto& r : runs) {
    mean += r[0];
  }
  EXPECT_GE(mean / 31.0, 0.2);
}

TEST(Saw, TrajectoryIsNonIncreasingInExpectation) {
  const std::vector<std::size_t> grid{10, 100, 1000, 10000};
  const auto q = saw_q_trajectory(6, grid, 10);
  ASSERT_EQ(q.size(), grid.size());
  EXPECT_LT(q.back(), q.front());
}

TEST(SawKnuth, DecisionTreeExpectationIsExactCount) {
  for (int m = 1; m <= 3; ++m) {
    EXPECT_EQ(saw_expected_weight(m, SawProposal::AvoidTraps),
              mpq_class(static_cast<unsigned long>(saw_enumerate(m).count)))
        << "m=" << m;
  }
}

TEST(SawKnuth, EveryWalkArrives) {
  Rng rng{11};
  for (int i = 0; i < 2000; ++i) {
    const SawSample s = sample_saw(7, rng, SawProposal::AvoidTraps);
    ASSERT_TRUE(s.reached);
    ASSERT_TRUE(std::isfinite(s.log_weight));
  }
}

TEST(SawKnuth, SmallGridsMatchEnumeration) {
  for (int m = 2; m <= 4; ++m) {
    const SawCount exact = saw_enumerate(m);
    const SawEstimate e = saw_estimate(m, 100000, 12 + m, SawProposal::AvoidTraps);
    EXPECT_EQ(e.success_rate, 1.0);
    EXPECT_NEAR(e.count, static_cast<double>(exact.count), 4.0 * e.count_std_error) << "m=" << m;
    EXPECT_NEAR(e.mean_length, exact.mean_length, 0.02 * exact.mean_length) << "m=" << m;
  }
}

TEST(SawKnuth, ParallelMatchesSerial) {
  const SawEstimate a = saw_estimate(6, 40000, 8, SawProposal::AvoidTraps);
  const SawEstimate b = saw_estimate_serial(6, 40000, 8, SawProposal::AvoidTraps);
  EXPECT_EQ(a.log_count, b.log_count);
  EXPECT_EQ(a.center_fraction, b.center_fraction);
}

TEST(SawKnuth, ProposalNames) {
  EXPECT_EQ(parse_saw_proposal("uniform"), SawProposal::UniformOpen);
  EXPECT_EQ(parse_saw_proposal("avoid_traps"), SawProposal::AvoidTraps);
  EXPECT_THROW((void)parse_saw_proposal("pivot"), UsageError);
}

TEST(SawProperty, SampleInvariants) {
  testing::Gen gen{601};
  for (std::size_t c = 0; c < testing::kPropertyCases; ++c) {
    const int m = gen.integer(1, 12);
    const SawSample s = sample_saw(m, gen.rng());
    if (!s.reached) {
      ASSERT_EQ(s.log_weight, kNegInf);
    } else {
      ASSERT_TRUE(std::isfinite(s.log_weight));
      ASSERT_GE(s.length, 2 * m);
      ASSERT_EQ(s.length % 2, 0);  // corner to opposite corner has even parity
    }
    ASSERT_LE(s.length, (m + 1) * (m + 1));
  }
}

}  // namespace
}  // namespace isamp
