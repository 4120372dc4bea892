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
#include <vector>

#include <gtest/gtest.h>

#include "isamp/logspace.hpp"
#include "isamp/parallel.hpp"
#include "isamp/rng.hpp"
#include "support/generators.hpp"

namespace isamp {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a{123};
  Rng b{123};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a(), b());
  }
}

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng{5};
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, BelowCoversRangeEvenly) {
  Rng rng{9};
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    ++counts[rng.below(7)];
  }
  for (const int c : counts) {
    EXPECT_NEAR(c, draws / 7.0, 5.0 * std::sqrt(draws / 7.0));
  }
}

TEST(Rng, BinomialMeanMatches) {
  Rng rng{11};
  double total = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    total += static_cast<double>(rng.binomial(100, 0.3));
  }
  EXPECT_NEAR(total / draws, 30.0, 5.0 * std::sqrt(21.0 / draws));
}

TEST(LogSpace, LogAddAndSub) {
  EXPECT_NEAR(log_add(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-15);
  EXPECT_NEAR(log_sub(std::log(5.0), std::log(3.0)), std::log(2.0), 1e-15);
  EXPECT_EQ(log_sub(1.0, 1.0), kNegInf);
  EXPECT_EQ(log_add(kNegInf, kNegInf), kNegInf);
  EXPECT_DOUBLE_EQ(log_add(kNegInf, 2.0), 2.0);
}

TEST(LogSpace, LogSumExpHandlesHugeRange) {
  const std::vector<double> v{1e5, 1e5, kNegInf};
  EXPECT_NEAR(log_sum_exp(v), 1e5 + std::log(2.0), 1e-9);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kNegInf);
}

TEST(LogSpace, LogChoose) {
  EXPECT_NEAR(log_choose(10, 3), std::log(120.0), 1e-12);
  EXPECT_EQ(log_choose(3, 4), kNegInf);
}

TEST(LogSpace, NormalTail) {
  EXPECT_NEAR(normal_upper_tail(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_upper_tail(1.959963984540054), 0.025, 1e-12);
  EXPECT_NEAR(normal_cdf(-2.0) + normal_upper_tail(-2.0), 1.0, 1e-15);
  EXPECT_GT(normal_upper_tail(30.0), 0.0);
}

TEST(LogSpaceProperty, MergeMatchesSinglePass) {
  testing::Gen gen{101};
  for (std::size_t c = 0; c < testing::kPropertyCases; ++c) {
    const auto n = static_cast<std::size_t>(gen.integer(1, 200));
    const auto w = gen.log_weights(n, 500.0);
    const auto split = static_cast<std::size_t>(gen.integer(0, static_cast<int>(n)));
    LogSumExp whole;
    LogSumExp left;
    LogSumExp right;
    for (std::size_t i = 0; i < n; ++i) {
      whole.add(w[i]);
      (i < split ? left : right).add(w[i]);
    }
    left.merge(right);
    ASSERT_NEAR(left.value(), whole.value(), 1e-12 * std::max(1.0, std::abs(whole.value())));
    ASSERT_EQ(left.max(), whole.max());
  }
}

TEST(Parallel, MapMatchesSerial) {
  auto fn = [](std::size_t i) { return Rng::stream(3, i).uniform(); };
  EXPECT_EQ(map_replicates(257, fn), map_replicates_serial(257, fn));
}

TEST(Parallel, Summarize) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const McEstimate e = summarize(v);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

}  // namespace
}  // namespace isamp
