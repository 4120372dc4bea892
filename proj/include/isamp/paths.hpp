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

#ifndef ISAMP_PATHS_HPP
#define ISAMP_PATHS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "isamp/rng.hpp"

/**
 * \file
 * \brief Sequential importance sampling of lattice paths.
 *
 * Monotone paths: up/right steps from (0,0) to (n,n), proposal flips a fair coin until the walk
 * hits the top or right side at time T, target is uniform over all C(2n,n) paths.
 *
 * Self-avoiding walks: corner-to-corner on an m x m grid of cells ((m+1)^2 vertices), proposal
 * steps uniformly among unvisited neighbours; the weight is the product of the choice counts and
 * dead ends keep weight zero. SawProposal::AvoidTraps only offers neighbours from which the far
 * corner is still reachable, so every walk arrives.
 */

namespace isamp {

enum class PathLaw { Mu, Nu };

struct MonotonePathSample {
  int T = 0;
  double log_mu_prob = 0.0;  ///< -T ln 2
  int n = 0;

  /// log rho = T ln 2 - ln C(2n, n).
  [[nodiscard]] double log_rho() const;
};

MonotonePathSample sample_monotone_path(int n, Rng& rng);

/// P(T = j) under mu or nu; 0 outside n <= j <= 2n - 1.
double t_pmf(int n, int j, PathLaw law);
/// Same, as an exact rational.
mpq_class t_pmf_exact(int n, int j, PathLaw law);

struct MonotoneL {
  double exact = 0.0;       ///< -ln C(2n,n) + (2 - 2/(n+1)) n ln 2
  double asymptotic = 0.0;  ///< ln sqrt(pi n) - 2 ln 2
};

MonotoneL monotone_L(int n);

inline constexpr int kMaxEnumeratedGrid = 5;

enum class SawProposal { UniformOpen, AvoidTraps };

/// "uniform" or "avoid_traps"; anything else is a UsageError.
SawProposal parse_saw_proposal(std::string_view name);

/// Exact self-avoiding corner-to-corner paths and their uniform-law statistics.
struct SawCount {
  std::uint64_t count = 0;
  double mean_length = 0.0;      ///< edges
  double center_fraction = 0.0;  ///< share of paths through (m/2, m/2)
};

/// Exhaustive depth-first count for m <= 5; throws ResourceError beyond.
SawCount saw_enumerate(int m);

/// E(SIS weight) by traversing the full decision tree, in exact rational arithmetic.
mpq_class saw_expected_weight(int m, SawProposal proposal = SawProposal::UniformOpen);

struct SawSample {
  bool reached = false;
  double log_weight = 0.0;  ///< -inf for dead ends
  int length = 0;
  bool visited_center = false;
};

/// One SIS draw on the m x m grid.
SawSample sample_saw(int m, Rng& rng, SawProposal proposal = SawProposal::UniformOpen);

struct SawEstimate {
  std::size_t draws = 0;
  double log_count = 0.0;         ///< log of the mean weight
  double count = 0.0;
  double count_std_error = 0.0;
  double mean_length = 0.0;       ///< weight-averaged
  double center_fraction = 0.0;   ///< weight-averaged
  double q_n = 0.0;               ///< max weight / total weight
  double success_rate = 0.0;
};

/// Draws per chunk in `saw_estimate`; draw i comes from stream (seed, i / kSawChunkDraws).
inline constexpr std::size_t kSawChunkDraws = std::size_t{1} << 14U;

/// n SIS draws in fixed chunks, each chunk on its own stream; OpenMP-parallel over chunks.
SawEstimate saw_estimate(int m, std::size_t n, std::uint64_t seed, SawProposal proposal = SawProposal::UniformOpen);
/// Serial reference for `saw_estimate`.
SawEstimate saw_estimate_serial(int m, std::size_t n, std::uint64_t seed,
                                SawProposal proposal = SawProposal::UniformOpen);

/// Q_n along one sequential stream of draws, recorded at each (increasing) n in `grid`.
std::vector<double> saw_q_trajectory(int m, std::span<const std::size_t> grid, std::uint64_t seed,
                                     SawProposal proposal = SawProposal::UniformOpen);

}  // namespace isamp

#endif  // ISAMP_PATHS_HPP
