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
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "isamp/errors.hpp"
#include "isamp/experiments.hpp"

namespace isamp {
namespace {

ExperimentConfig small_config(const std::string& experiment, std::uint64_t seed) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.seed = seed;
  if (experiment == "fig1" || experiment == "fig2" || experiment == "fig4") {
    c.n_grid = {10, 100};
    c.replicates = 20;
  } else if (experiment == "fig3") {
    c.n_grid = {1, 10, 1000};
  } else if (experiment == "fig5") {
    c.n_grid = {10, 100};
    c.overrides["grid_size"] = "4";
    c.overrides["trajectories"] = "3";
  } else if (experiment == "rare_report") {
    c.overrides["n"] = "1000";
  }
  return c;
}

double cell(const CsvReport& r, std::size_t row, const std::string& column) {
  for (std::size_t i = 0; i < r.header.size(); ++i) {
    if (r.header[i] == column) {
      return std::stod(r.rows.at(row).at(i));
    }
  }
  ADD_FAILURE() << "no column " << column;
  return 0.0;
}

std::string text_cell(const CsvReport& r, std::size_t row, const std::string& column) {
  for (std::size_t i = 0; i < r.header.size(); ++i) {
    if (r.header[i] == column) {
      return r.rows.at(row).at(i);
    }
  }
  ADD_FAILURE() << "no column " << column;
  return {};
}

TEST(Config, ParsesKeyValueLines) {
  std::istringstream in(
      "# a comment\n"
      "experiment = fig2\n"
      "\n"
      "seed=7\n"
      "n_grid = 10, 100,1000\n"
      "replicates = 50  # trailing comment\n"
      "grid_size = 6\n");
  const ExperimentConfig c = parse_config(in);
  EXPECT_EQ(c.experiment, "fig2");
  EXPECT_EQ(c.seed, 7U);
  EXPECT_EQ(c.n_grid, (std::vector<double>{10, 100, 1000}));
  EXPECT_EQ(c.replicates, 50U);
  EXPECT_EQ(c.overrides.at("grid_size"), "6");
}

TEST(Config, BaseValuesSurviveAndFileOverrides) {
  ExperimentConfig base;
  base.seed = 99;
  base.experiment = "fig1";
  std::istringstream in("experiment = fig3\n");
  const ExperimentConfig c = parse_config(in, base);
  EXPECT_EQ(c.experiment, "fig3");
  EXPECT_EQ(c.seed, 99U);
}

TEST(Config, Errors) {
  std::istringstream missing_eq("seed 4\n");
  EXPECT_THROW((void)parse_config(missing_eq), UsageError);
  std::istringstream empty_key(" = 4\n");
  EXPECT_THROW((void)parse_config(empty_key), UsageError);
  std::istringstream bad_seed("seed = -3\n");
  EXPECT_THROW((void)parse_config(bad_seed), UsageError);
  std::istringstream bad_grid("n_grid = 10,x\n");
  EXPECT_THROW((void)parse_config(bad_grid), UsageError);
  EXPECT_THROW((void)load_config("/nonexistent/dir/cfg.txt"), IoError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.experiment = "fig1";
  c.n_grid = {10, 10};
  EXPECT_THROW(c.validate(), UsageError);
  c.n_grid = {0, 10};
  EXPECT_THROW(c.validate(), UsageError);
  c.n_grid = {10, 20};
  c.replicates = 1;
  EXPECT_THROW(c.validate(), UsageError);
  c.replicates = 2;
  EXPECT_NO_THROW(c.validate());
}

TEST(Experiments, NamesRoundTrip) {
  for (const char* name :
       {"fig1", "fig2", "fig3", "fig4", "fig5", "large_binom_report", "gibbs_sweep", "rare_report"}) {
    EXPECT_EQ(to_string(parse_experiment(name)), name);
  }
  EXPECT_THROW((void)parse_experiment("fig6"), UsageError);
  ExperimentConfig c;
  c.experiment = "nope";
  EXPECT_THROW((void)run_experiment(c), UsageError);
}

TEST(Csv, NumberFormats) {
  EXPECT_EQ(csv_number(0.1), "0.10000000000000001");
  EXPECT_EQ(csv_number(2.0), "2");
  EXPECT_EQ(console_number(1.0 / 3.0), "0.333333");
  EXPECT_EQ(console_number(123456789.0), "1.23457e+08");
}

TEST(Csv, Layout) {
  CsvReport r;
  r.header = {"a", "b"};
  r.rows = {{"1", "2"}, {"3", "4"}};
  r.warnings = {"careful"};
  r.footer = {"seed=1"};
  EXPECT_EQ(r.str(), "a,b\n1,2\n3,4\n# warning: careful\n# seed=1\n");
  EXPECT_THROW(r.write("/nonexistent/dir/out.csv"), IoError);
}

TEST(Grids, Defaults) {
  const auto g3 = default_grid(ExperimentKind::Fig3);
  EXPECT_EQ(g3.front(), 1.0);
  EXPECT_EQ(g3.back(), 1e6);
  EXPECT_LE(g3.size(), 25U);
  const auto g5 = default_grid(ExperimentKind::Fig5);
  EXPECT_EQ(g5.front(), 10.0);
  EXPECT_EQ(g5.back(), 1e5);
  for (const auto& g : {g3, g5, default_grid(ExperimentKind::Fig1), default_grid(ExperimentKind::Fig2)}) {
    for (std::size_t i = 1; i < g.size(); ++i) {
      ASSERT_LT(g[i - 1], g[i]);
    }
  }
}

TEST(Experiments, Columns) {
  EXPECT_EQ(run_experiment(small_config("fig1", 1)).header, (std::vector<std::string>{"n", "mad", "thm1_bound"}));
  EXPECT_EQ(run_experiment(small_config("fig3", 1)).header, (std::vector<std::string>{"n", "sqrt_v_n", "abs_err"}));
  EXPECT_EQ(run_experiment(small_config("fig4", 1)).header,
            (std::vector<std::string>{"n", "sqrt_v_n", "q_n_mean", "q_n_se"}));
  const CsvReport f5 = run_experiment(small_config("fig5", 1));
  EXPECT_EQ(f5.header, (std::vector<std::string>{"n", "Q_1", "Q_2", "Q_3", "mean"}));
  EXPECT_EQ(f5.rows.size(), 2U);
  ExperimentConfig plain = small_config("fig5", 1);
  plain.overrides["proposal"] = "uniform";
  EXPECT_NE(run_experiment(plain).str(), f5.str());
  plain.overrides["proposal"] = "pivot";
  EXPECT_THROW((void)run_experiment(plain), UsageError);
}

TEST(Experiments, DeterministicAndSeedSensitive) {
  for (const char* name :
       {"fig1", "fig2", "fig3", "fig4", "fig5", "large_binom_report", "gibbs_sweep", "rare_report"}) {
    const std::string a = run_experiment(small_config(name, 5)).str();
    const std::string b = run_experiment(small_config(name, 5)).str();
    const std::string c = run_experiment(small_config(name, 6)).str();
    EXPECT_EQ(a, b) << name;
    EXPECT_NE(a, c) << name;
  }
}

TEST(Experiments, FooterCarriesProvenance) {
  ExperimentConfig c = small_config("large_binom_report", 3);
  const std::string text = run_experiment(c).str();
  EXPECT_NE(text.find("# seed=3\n"), std::string::npos);
  EXPECT_NE(text.find("# version=0.1.0\n"), std::string::npos);
  EXPECT_EQ(text.find("wall_clock"), std::string::npos);
  c.timing = true;
  EXPECT_NE(run_experiment(c).str().find("# wall_clock_s="), std::string::npos);
}

TEST(Experiments, LargeBinomialReport) {
  const CsvReport r = run_experiment(small_config("large_binom_report", 1));
  ASSERT_EQ(r.rows.size(), 7U);
  EXPECT_NEAR(std::stod(r.rows[0][1]), 368064.2, 0.1);
  EXPECT_NEAR(std::stod(r.rows[1][1]), 659.167, 0.001);
  const double upper = std::stod(r.rows[3][1]);
  const double lower = std::stod(r.rows[5][1]);
  EXPECT_GE(upper, 0.05);
  EXPECT_LE(upper, 0.10);
  EXPECT_GE(lower, 0.01);
  EXPECT_LE(lower, 0.05);
  EXPECT_NEAR(std::stod(r.rows[6][1]), 1e6 * std::log(1.64), 1.0);
}

TEST(Experiments, Fig2ConvergesAroundFourHundred) {
  ExperimentConfig c;
  c.experiment = "fig2";
  c.n_grid = {400};
  c.replicates = 200;
  const CsvReport r = run_experiment(c);
  EXPECT_LT(cell(r, 0, "mad"), 0.1);
  EXPECT_LE(cell(r, 0, "mad"), cell(r, 0, "thm1_bound"));
}

TEST(Verdict, PureThresholdRule) {
  EXPECT_EQ(qn_verdict({0.001, 0.0}, 0.01), kConvergedVerdict);
  EXPECT_EQ(qn_verdict({0.005, 0.002}, 0.01), kConvergedVerdict);
  EXPECT_EQ(qn_verdict({0.005, 0.0025}, 0.01), kNotConvergedVerdict);
  EXPECT_EQ(qn_verdict({0.2, 0.0}, 0.01), kNotConvergedVerdict);
  EXPECT_EQ(qn_verdict({0.2, 0.0}, 0.5), kConvergedVerdict);
}

TEST(Diagnose, IdentityPair) {
  DiagnoseRequest req;
  req.pair = "identity";
  req.n_grid = {1000};
  req.replicates = 10;
  const CsvReport r = diagnose(req);
  EXPECT_DOUBLE_EQ(cell(r, 0, "q_n_mean"), 0.001);
  EXPECT_EQ(text_cell(r, 0, "verdict"), kConvergedVerdict);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Diagnose, SkewedBinomialIsNotConverged) {
  DiagnoseRequest req;
  req.pair = "binom";
  req.params = {{"N", 100}, {"p0", 0.5}, {"p1", 0.7}};
  req.n_grid = {10000};
  req.replicates = 20;
  const CsvReport r = diagnose(req);
  EXPECT_GE(cell(r, 0, "q_n_mean"), 0.05);
  EXPECT_EQ(text_cell(r, 0, "verdict"), kNotConvergedVerdict);
}

TEST(Diagnose, CounterexampleWarns) {
  DiagnoseRequest req;
  req.pair = "counterexample";
  req.params = {{"N", 1e6}};
  req.n_grid = {1000};
  req.replicates = 20;
  const CsvReport r = diagnose(req);
  EXPECT_EQ(text_cell(r, 0, "verdict"), kConvergedVerdict);
  ASSERT_EQ(r.warnings.size(), 1U);
  EXPECT_NE(r.str().find("# warning: "), std::string::npos);
}

TEST(Diagnose, Errors) {
  DiagnoseRequest req;
  req.pair = "bogus";
  EXPECT_THROW((void)diagnose(req), UsageError);
  req.pair = "identity";
  req.replicates = 1;
  EXPECT_THROW((void)diagnose(req), UsageError);
}

}  // namespace
}  // namespace isamp
