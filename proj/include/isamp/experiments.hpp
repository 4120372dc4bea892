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

#ifndef ISAMP_EXPERIMENTS_HPP
#define ISAMP_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "isamp/parallel.hpp"

/**
 * \file
 * \brief Named experiments, plain-text configs and deterministic CSV reports.
 */

namespace isamp {

inline constexpr std::string_view kVersion = "0.1.0";

enum class ExperimentKind { Fig1, Fig2, Fig3, Fig4, Fig5, LargeBinomReport, GibbsSweep, RareReport };

/// Throws UsageError for unknown names.
ExperimentKind parse_experiment(std::string_view name);
std::string_view to_string(ExperimentKind kind);

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 42;
  std::vector<double> n_grid;              ///< empty means the experiment default
  std::optional<std::size_t> replicates;   ///< empty means the experiment default
  std::string output_path;
  std::map<std::string, std::string> overrides;
  bool timing = false;                     ///< adds a wall-clock footer line (breaks byte determinism)

  /// Applies one `key = value` setting; unknown keys land in `overrides`.
  void set(const std::string& key, const std::string& value);
  /// Throws UsageError unless the grid is strictly increasing and replicates >= 2.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Throws UsageError on malformed lines.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// 17 significant digits.
std::string csv_number(double x);
/// 6 significant digits.
std::string console_number(double x);

struct CsvReport {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;    ///< written as `# line`
  std::vector<std::string> warnings;  ///< written as `# warning: line`

  [[nodiscard]] std::string str() const;
  /// Throws IoError when the file cannot be written.
  void write(const std::string& path) const;
};

/// Runs a named experiment. Throws UsageError for unknown names.
CsvReport run_experiment(const ExperimentConfig& config);

/// Default sample-size grid of an experiment (empty for the analytic reports).
std::vector<double> default_grid(ExperimentKind kind);

/// `points` log-spaced integers from lo to hi, duplicates dropped.
std::vector<double> log_spaced_grid(double lo, double hi, int points);

inline constexpr std::string_view kConvergedVerdict = "CONVERGED-BY-QN";
inline constexpr std::string_view kNotConvergedVerdict = "NOT-CONVERGED";

/// CONVERGED-BY-QN when mean + 2 se < threshold.
std::string_view qn_verdict(const McEstimate& qn, double threshold);

struct DiagnoseRequest {
  std::string pair = "identity";
  std::map<std::string, double> params;
  std::vector<double> n_grid{10, 100, 1000, 10000};
  std::size_t replicates = 500;
  std::uint64_t seed = 42;
  double qn_threshold = 0.01;
};

/// Per-n diagnostics with a q_n verdict column.
CsvReport diagnose(const DiagnoseRequest& request);

}  // namespace isamp

#endif  // ISAMP_EXPERIMENTS_HPP
