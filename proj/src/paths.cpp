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

#include "isamp/paths.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "isamp/errors.hpp"
#include "isamp/logspace.hpp"
#include "isamp/parallel.hpp"

namespace isamp {
namespace {

constexpr std::array<std::array<int, 2>, 4> kMoves{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};

mpz_class choose(unsigned long n, unsigned long k) {
  mpz_class out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

class Grid {
 public:
  explicit Grid(int m) : m_{m}, side_{m + 1} {}

  [[nodiscard]] int index(int x, int y) const { return y * side_ + x; }
  [[nodiscard]] int vertices() const { return side_ * side_; }
  [[nodiscard]] int target() const { return index(m_, m_); }
  [[nodiscard]] int center() const { return index(m_ / 2, m_ / 2); }
  [[nodiscard]] bool inside(int x, int y) const { return x >= 0 && y >= 0 && x <= m_ && y <= m_; }
  [[nodiscard]] int x_of(int v) const { return v % side_; }
  [[nodiscard]] int y_of(int v) const { return v / side_; }

  /// Marks (with `mark`) every vertex reachable from the target through unvisited vertices.
  template <class Visited, class Marks>
  void mark_reachable(const Visited& visited, Marks& marks, std::uint32_t mark, std::vector<int>& queue) const {
    queue.clear();
    queue.push_back(target());
    marks[static_cast<std::size_t>(target())] = mark;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int v = queue[head];
      const int x = x_of(v);
      const int y = y_of(v);
      for (const auto& mv : kMoves) {
        const int nx = x + mv[0];
        const int ny = y + mv[1];
        if (!inside(nx, ny)) {
          continue;
        }
        const int u = index(nx, ny);
        if (!visited(u) && marks[static_cast<std::size_t>(u)] != mark) {
          marks[static_cast<std::size_t>(u)] = mark;
          queue.push_back(u);
        }
      }
    }
  }

  /// Unvisited neighbours of v; returns how many were written.
  template <class Visited>
  int open_neighbours(int v, const Visited& visited, std::array<int, 4>& out) const {
    int d = 0;
    const int x = x_of(v);
    const int y = y_of(v);
    for (const auto& mv : kMoves) {
      const int nx = x + mv[0];
      const int ny = y + mv[1];
      if (inside(nx, ny) && !visited(index(nx, ny))) {
        out[static_cast<std::size_t>(d++)] = index(nx, ny);
      }
    }
    return d;
  }

 private:
  int m_;
  int side_;
};

/// Reusable SIS walker; visit marks are epoch stamps so nothing is cleared between walks.
class SawWalker {
 public:
  SawWalker(int m, SawProposal proposal)
      : grid_{m},
        proposal_{proposal},
        stamp_(static_cast<std::size_t>(grid_.vertices()), 0),
        reach_(static_cast<std::size_t>(grid_.vertices()), 0) {
    for (std::size_t d = 1; d < log_choices_.size(); ++d) {
      log_choices_[d] = std::log(static_cast<double>(d));
    }
  }

  SawSample walk(Rng& rng) {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0U);
      epoch_ = 1;
    }
    auto visited = [this](int v) { return stamp_[static_cast<std::size_t>(v)] == epoch_; };
    SawSample s;
    int v = 0;
    stamp_[0] = epoch_;
    s.visited_center = v == grid_.center();
    std::array<int, 4> open{};
    while (v != grid_.target()) {
      int d = grid_.open_neighbours(v, visited, open);
      if (proposal_ == SawProposal::AvoidTraps && d > 1) {
        d = keep_reachable(visited, open, d);
      }
      if (d == 0) {
        s.reached = false;
        s.log_weight = kNegInf;
        return s;
      }
      s.log_weight += log_choices_[static_cast<std::size_t>(d)];
      v = open[static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(d)))];
      stamp_[static_cast<std::size_t>(v)] = epoch_;
      ++s.length;
      s.visited_center = s.visited_center || v == grid_.center();
    }
    s.reached = true;
    return s;
  }

 private:
  template <class Visited>
  int keep_reachable(const Visited& visited, std::array<int, 4>& open, int d) {
    if (++reach_mark_ == 0) {
      std::fill(reach_.begin(), reach_.end(), 0U);
      reach_mark_ = 1;
    }
    grid_.mark_reachable(visited, reach_, reach_mark_, queue_);
    int kept = 0;
    for (int i = 0; i < d; ++i) {
      const int u = open[static_cast<std::size_t>(i)];
      if (reach_[static_cast<std::size_t>(u)] == reach_mark_) {
        open[static_cast<std::size_t>(kept++)] = u;
      }
    }
    return kept;
  }

  Grid grid_;
  SawProposal proposal_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> reach_;
  std::uint32_t reach_mark_ = 0;
  std::vector<int> queue_;
  std::array<double, 5> log_choices_{};
};

struct SawPartial {
  std::size_t draws = 0;
  std::size_t successes = 0;
  LogSumExp weights;
  LogSumExp squares;
  LogSumExp length_weighted;
  LogSumExp center_weighted;

  void add(const SawSample& s) {
    ++draws;
    if (!s.reached) {
      return;
    }
    ++successes;
    weights.add(s.log_weight);
    squares.add(2.0 * s.log_weight);
    if (s.length > 0) {
      length_weighted.add(s.log_weight + std::log(static_cast<double>(s.length)));
    }
    if (s.visited_center) {
      center_weighted.add(s.log_weight);
    }
  }

  void merge(const SawPartial& o) {
    draws += o.draws;
    successes += o.successes;
    weights.merge(o.weights);
    squares.merge(o.squares);
    length_weighted.merge(o.length_weighted);
    center_weighted.merge(o.center_weighted);
  }

  [[nodiscard]] SawEstimate estimate() const {
    SawEstimate e;
    e.draws = draws;
    const double n = static_cast<double>(draws);
    e.success_rate = static_cast<double>(successes) / n;
    const double lw = weights.value();
    e.log_count = lw - std::log(n);
    e.count = std::exp(e.log_count);
    // Var of the weight relative to the squared mean, to stay in range.
    const double second_rel = std::exp(squares.value() - std::log(n) - 2.0 * e.log_count);
    e.count_std_error = e.count * std::sqrt(std::max(second_rel - 1.0, 0.0) / std::max(n - 1.0, 1.0));
    if (!weights.empty()) {
      e.mean_length = std::exp(length_weighted.value() - lw);
      e.center_fraction = center_weighted.empty() ? 0.0 : std::exp(center_weighted.value() - lw);
      e.q_n = weights.max_share();
    }
    return e;
  }
};

SawPartial run_chunk(int m, std::size_t n, std::uint64_t seed, std::size_t chunk, SawProposal proposal) {
  SawWalker walker{m, proposal};
  Rng rng = Rng::stream(seed, chunk);
  SawPartial part;
  const std::size_t begin = chunk * kSawChunkDraws;
  const std::size_t end = std::min(n, begin + kSawChunkDraws);
  for (std::size_t i = begin; i < end; ++i) {
    part.add(walker.walk(rng));
  }
  return part;
}

void require_grid(int m) {
  if (m < 1) {
    throw DomainError("grid size must be at least 1");
  }
}

void expected_weight_from(const Grid& grid, SawProposal proposal, int v, std::vector<char>& visited,
                          const mpq_class& prob, const mpz_class& weight, mpq_class& total) {
  if (v == grid.target()) {
    total += prob * weight;
    return;
  }
  std::array<int, 4> open{};
  const auto is_visited = [&](int u) { return visited[static_cast<std::size_t>(u)] != 0; };
  int d = grid.open_neighbours(v, is_visited, open);
  if (proposal == SawProposal::AvoidTraps) {
    std::vector<std::uint32_t> marks(visited.size(), 0);
    std::vector<int> queue;
    grid.mark_reachable(is_visited, marks, 1U, queue);
    int kept = 0;
    for (int i = 0; i < d; ++i) {
      if (marks[static_cast<std::size_t>(open[static_cast<std::size_t>(i)])] == 1U) {
        open[static_cast<std::size_t>(kept++)] = open[static_cast<std::size_t>(i)];
      }
    }
    d = kept;
  }
  if (d == 0) {
    return;  // dead end: weight zero
  }
  const mpq_class step_prob = prob / d;
  const mpz_class step_weight = weight * d;
  for (int i = 0; i < d; ++i) {
    const int u = open[static_cast<std::size_t>(i)];
    visited[static_cast<std::size_t>(u)] = 1;
    expected_weight_from(grid, proposal, u, visited, step_prob, step_weight, total);
    visited[static_cast<std::size_t>(u)] = 0;
  }
}

}  // namespace

SawProposal parse_saw_proposal(std::string_view name) {
  if (name == "uniform") {
    return SawProposal::UniformOpen;
  }
  if (name == "avoid_traps") {
    return SawProposal::AvoidTraps;
  }
  throw UsageError(fmt::format("unknown SAW proposal '{}' (uniform or avoid_traps)", name));
}

double MonotonePathSample::log_rho() const {
  return T * std::numbers::ln2 - log_choose(2.0 * n, static_cast<double>(n));
}

MonotonePathSample sample_monotone_path(int n, Rng& rng) {
  if (n < 1) {
    throw DomainError("grid size must be at least 1");
  }
  int ups = 0;
  int rights = 0;
  int steps = 0;
  while (ups < n && rights < n) {
    // Top bit of one engine draw is a fair coin.
    (rng() >> 63U) != 0U ? ++ups : ++rights;
    ++steps;
  }
  return {steps, -steps * std::numbers::ln2, n};
}

double t_pmf(int n, int j, PathLaw law) {
  if (n < 1 || j < n || j > 2 * n - 1) {
    return 0.0;
  }
  const double lc = log_choose(j - 1.0, n - 1.0);
  if (law == PathLaw::Mu) {
    return std::exp((1.0 - j) * std::numbers::ln2 + lc);
  }
  return std::exp(std::numbers::ln2 + lc - log_choose(2.0 * n, static_cast<double>(n)));
}

mpq_class t_pmf_exact(int n, int j, PathLaw law) {
  if (n < 1 || j < n || j > 2 * n - 1) {
    return 0;
  }
  const mpz_class c = choose(static_cast<unsigned long>(j - 1), static_cast<unsigned long>(n - 1));
  mpq_class out;
  if (law == PathLaw::Mu) {
    mpz_class denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), 2, static_cast<unsigned long>(j - 1));
    out = mpq_class(c, denom);
  } else {
    out = mpq_class(2 * c, choose(2UL * static_cast<unsigned long>(n), static_cast<unsigned long>(n)));
  }
  out.canonicalize();
  return out;
}

MonotoneL monotone_L(int n) {
  if (n < 1) {
    throw DomainError("grid size must be at least 1");
  }
  const double nd = n;
  MonotoneL out;
  out.exact = -log_choose(2.0 * nd, nd) + (2.0 - 2.0 / (nd + 1.0)) * nd * std::numbers::ln2;
  out.asymptotic = 0.5 * std::log(std::numbers::pi * nd) - 2.0 * std::numbers::ln2;
  return out;
}

SawCount saw_enumerate(int m) {
  require_grid(m);
  if (m > kMaxEnumeratedGrid) {
    throw ResourceError(fmt::format("exhaustive enumeration is capped at m = {}", kMaxEnumeratedGrid));
  }
  const Grid grid{m};
  std::vector<char> visited(static_cast<std::size_t>(grid.vertices()), 0);
  struct Frame {
    int vertex;
    int next_move;
  };
  std::vector<Frame> stack;
  stack.push_back({0, 0});
  visited[0] = 1;
  std::uint64_t count = 0;
  std::uint64_t total_length = 0;
  std::uint64_t through_center = 0;
  const bool center_is_start = grid.center() == 0;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.vertex == grid.target()) {
      ++count;
      total_length += stack.size() - 1;
      if (center_is_start || visited[static_cast<std::size_t>(grid.center())] != 0) {
        ++through_center;
      }
      visited[static_cast<std::size_t>(top.vertex)] = 0;
      stack.pop_back();
      continue;
    }
    if (top.next_move == 4) {
      visited[static_cast<std::size_t>(top.vertex)] = 0;
      stack.pop_back();
      continue;
    }
    const auto& mv = kMoves[static_cast<std::size_t>(top.next_move++)];
    const int nx = grid.x_of(top.vertex) + mv[0];
    const int ny = grid.y_of(top.vertex) + mv[1];
    if (!grid.inside(nx, ny)) {
      continue;
    }
    const int u = grid.index(nx, ny);
    if (visited[static_cast<std::size_t>(u)] != 0) {
      continue;
    }
    visited[static_cast<std::size_t>(u)] = 1;
    stack.push_back({u, 0});
  }
  SawCount out;
  out.count = count;
  out.mean_length = static_cast<double>(total_length) / static_cast<double>(count);
  out.center_fraction = static_cast<double>(through_center) / static_cast<double>(count);
  return out;
}

mpq_class saw_expected_weight(int m, SawProposal proposal) {
  require_grid(m);
  if (m > kMaxEnumeratedGrid) {
    throw ResourceError(fmt::format("decision-tree traversal is capped at m = {}", kMaxEnumeratedGrid));
  }
  const Grid grid{m};
  std::vector<char> visited(static_cast<std::size_t>(grid.vertices()), 0);
  visited[0] = 1;
  mpq_class total = 0;
  expected_weight_from(grid, proposal, 0, visited, mpq_class(1), mpz_class(1), total);
  return total;
}

SawSample sample_saw(int m, Rng& rng, SawProposal proposal) {
  require_grid(m);
  SawWalker walker{m, proposal};
  return walker.walk(rng);
}

SawEstimate saw_estimate(int m, std::size_t n, std::uint64_t seed, SawProposal proposal) {
  require_grid(m);
  if (n == 0) {
    throw DomainError("need at least one draw");
  }
  const std::size_t chunks = (n + kSawChunkDraws - 1) / kSawChunkDraws;
  const auto parts = map_replicates(chunks, [&](std::size_t c) { return run_chunk(m, n, seed, c, proposal); });
  SawPartial total;
  for (const auto& p : parts) {
    total.merge(p);
  }
  return total.estimate();
}

SawEstimate saw_estimate_serial(int m, std::size_t n, std::uint64_t seed, SawProposal proposal) {
  require_grid(m);
  if (n == 0) {
    throw DomainError("need at least one draw");
  }
  const std::size_t chunks = (n + kSawChunkDraws - 1) / kSawChunkDraws;
  SawPartial total;
  for (std::size_t c = 0; c < chunks; ++c) {
    total.merge(run_chunk(m, n, seed, c, proposal));
  }
  return total.estimate();
}

std::vector<double> saw_q_trajectory(int m, std::span<const std::size_t> grid, std::uint64_t seed,
                                     SawProposal proposal) {
  require_grid(m);
  SawWalker walker{m, proposal};
  Rng rng{seed};
  LogSumExp weights;
  std::vector<double> out;
  out.reserve(grid.size());
  std::size_t drawn = 0;
  for (const std::size_t target : grid) {
    for (; drawn < target; ++drawn) {
      const SawSample s = walker.walk(rng);
      if (s.reached) {
        weights.add(s.log_weight);
      }
    }
    out.push_back(weights.empty() ? 1.0 : weights.max_share());
  }
  return out;
}

}  // namespace isamp
