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

#ifndef ISAMP_PARALLEL_HPP
#define ISAMP_PARALLEL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include <omp.h>

/**
 * \file
 * \brief Replicate-level parallel kernels.
 *
 * Each kernel evaluates an independent function per index and stores the result at that index.
 * Reductions happen afterwards, serially and in index order, so the OpenMP kernel and its serial
 * reference return bit-identical results for any thread count.
 */

namespace isamp {

/// Mean and standard error of a set of replicate values.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sets the OpenMP team size used by the parallel kernels; values < 1 leave the runtime default.
inline void set_thread_count(int threads) {
  if (threads >= 1) {
    omp_set_num_threads(threads);
  }
}

/// `out[i] = fn(i)` for i in [0, count), OpenMP-parallel.
template <class Fn>
auto map_replicates(std::size_t count, Fn&& fn) {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out(count);
  const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
  }
  return out;
}

/// Serial reference for `map_replicates`.
template <class Fn>
auto map_replicates_serial(std::size_t count, Fn&& fn) {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = fn(i);
  }
  return out;
}

/// Sample mean and its standard error (sample sd / sqrt(count)).
inline McEstimate summarize(std::span<const double> values) {
  McEstimate est;
  if (values.empty()) {
    return est;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  est.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    return est;
  }
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - est.mean) * (v - est.mean);
  }
  est.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  return est;
}

}  // namespace isamp

#endif  // ISAMP_PARALLEL_HPP
