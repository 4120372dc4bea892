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

// Command-line entry point. Exit codes: 0 success, 1 usage, 2 numeric or domain failure, 3 I/O.

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "isamp/bounds.hpp"
#include "isamp/errors.hpp"
#include "isamp/estimators.hpp"
#include "isamp/experiments.hpp"
#include "isamp/gibbs.hpp"
#include "isamp/model.hpp"
#include "isamp/parallel.hpp"
#include "isamp/paths.hpp"
#include "isamp/rare_event.hpp"

namespace {

using namespace isamp;

constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct Globals {
  std::uint64_t seed = 42;
  std::string out;
  std::string config;
  int threads = 0;
  std::size_t replicates = 0;
  double qn_threshold = kDefaultQnThreshold;
};

struct PairArgs {
  std::string name = "identity";
  std::vector<std::string> params;
  std::string f = "one";
};

void add_pair_options(CLI::App* cmd, PairArgs& args) {
  cmd->add_option("--pair", args.name, "identity, exp12, exp, binom, large-binom, counterexample");
  cmd->add_option("--param", args.params, "pair parameter as key=value (binom: N, p0, p1; exp: mu_mean, nu_mean)");
  cmd->add_option("--f", args.f, "integrand: one or x");
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("parameter '{}' is not key=value", item));
    }
    try {
      out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError(fmt::format("parameter '{}' has a non-numeric value", item));
    }
  }
  return out;
}

PairModel build_pair(const PairArgs& args) { return isamp::make_pair(args.name, parse_params(args.params)); }

Integrand build_integrand(const std::string& name) {
  if (name == "one") {
    return Integrand::one();
  }
  if (name == "x") {
    return Integrand::identity();
  }
  throw UsageError(fmt::format("unknown integrand '{}'", name));
}

void emit(std::string_view key, double value) { fmt::print("{}={}\n", key, console_number(value)); }
void emit(std::string_view key, std::string_view value) { fmt::print("{}={}\n", key, value); }

void write_report(const CsvReport& report, const std::string& out, bool stdout_fallback) {
  if (!out.empty()) {
    report.write(out);
  } else if (stdout_fallback) {
    fmt::print("{}", report.str());
  }
}

int cmd_kl(const PairArgs& args, const std::string& method, std::size_t samples, const Globals& g) {
  const PairModel pair = build_pair(args);
  KlMethod m = KlMethod::ClosedForm;
  if (method == "exact") {
    m = KlMethod::ExactEnumeration;
  } else if (method == "mc") {
    m = KlMethod::MonteCarlo;
  } else if (method != "closed") {
    throw UsageError(fmt::format("unknown method '{}'", method));
  }
  const KlResult kl = kl_divergence(pair, m, samples, g.seed);
  emit("pair", pair.name());
  emit("L", kl.value);
  if (kl.std_error) {
    emit("std_error", *kl.std_error);
  }
  if (m != KlMethod::MonteCarlo) {
    const LogRhoMoments mom = logrho_moments(pair);
    emit("logrho_sd", mom.sd);
  }
  return 0;
}

int cmd_bound(const PairArgs& args, double log_n, const std::string& side, double delta) {
  const PairModel pair = build_pair(args);
  const Integrand f = build_integrand(args.f);
  const double L = kl_divergence(pair, KlMethod::ClosedForm).value;
  const TailModel tail = tail_model_for(pair);
  BoundQuery q{L, 0.0, l2_norm(pair, f), delta, BoundSide::Upper};
  if (side == "upper") {
    q.t = log_n - L;
  } else if (side == "lower") {
    q.side = BoundSide::Lower;
    q.t = L - log_n;
  } else {
    throw UsageError(fmt::format("unknown side '{}'", side));
  }
  emit("L", L);
  emit("t", q.t);
  emit("bound", thm1_bound(q, tail));
  if (q.side == BoundSide::Upper) {
    const SelfNormalizedBound sn = thm2_bound(q, tail);
    emit("self_normalized_eps", sn.epsilon);
    emit("self_normalized_probability", sn.probability);
  }
  return 0;
}

int cmd_samplesize(const PairArgs& args, double error) {
  const PairModel pair = build_pair(args);
  const Integrand f = build_integrand(args.f);
  const double L = kl_divergence(pair, KlMethod::ClosedForm).value;
  const SampleSizePlan plan = required_sample_size(L, l2_norm(pair, f), tail_model_for(pair), error);
  emit("L", L);
  emit("t", plan.t);
  emit("log_n", plan.log_n);
  if (plan.n) {
    emit("n", std::ceil(*plan.n));
  }
  return 0;
}

int cmd_run(const CLI::App& app, const Globals& g, const std::string& experiment, const std::vector<double>& grid,
            const std::vector<std::string>& sets, bool timing) {
  ExperimentConfig config;
  if (!g.config.empty()) {
    config = load_config(g.config);
  }
  if (!experiment.empty()) {
    config.experiment = experiment;
  }
  if (app.count("--seed") > 0 || g.config.empty()) {
    config.seed = g.seed;
  }
  if (g.replicates > 0) {
    config.replicates = g.replicates;
  }
  if (!g.out.empty()) {
    config.output_path = g.out;
  }
  if (!grid.empty()) {
    config.n_grid = grid;
  }
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("--set '{}' is not key=value", item));
    }
    config.set(item.substr(0, eq), item.substr(eq + 1));
  }
  config.timing = config.timing || timing;
  if (config.experiment.empty()) {
    throw UsageError("no experiment given (--experiment or config key 'experiment')");
  }
  const CsvReport report = run_experiment(config);
  write_report(report, config.output_path, true);
  return 0;
}

int cmd_diagnose(const PairArgs& args, const std::vector<double>& grid, const Globals& g) {
  DiagnoseRequest req;
  req.pair = args.name;
  req.params = parse_params(args.params);
  if (!grid.empty()) {
    req.n_grid = grid;
  }
  req.replicates = g.replicates > 0 ? g.replicates : kDefaultQnReplicates;
  req.seed = g.seed;
  req.qn_threshold = g.qn_threshold;
  const CsvReport report = diagnose(req);
  if (!g.out.empty()) {
    report.write(g.out);
  }
  for (const auto& row : report.rows) {
    fmt::print("n={} q_n={} se={} sqrt_v_n={} verdict={}\n", row[0], console_number(std::stod(row[6])),
               console_number(std::stod(row[7])), console_number(std::stod(row[4])), row[9]);
  }
  for (const auto& w : report.warnings) {
    fmt::print(stderr, "warning: {}\n", w);
  }
  return 0;
}

struct GibbsArgs {
  std::string model = "spins";
  int N = 10;
  double J = 1.0;
  double h = 0.0;
  double beta0 = 0.0;
  double beta = 1.0;
  double n = 0.0;
  double log_n = 0.0;
};

int cmd_gibbs(const GibbsArgs& a, const CLI::App& cmd, const Globals& g) {
  GibbsModel model = GibbsModel::independent_spins(a.N);
  ThermoModel thermo = spins_thermo();
  if (a.model == "ising") {
    model = GibbsModel::ising(a.N, a.J, a.h);
    thermo = ising_thermo(a.J, a.h);
  } else if (a.model != "spins") {
    throw UsageError(fmt::format("unknown model '{}'", a.model));
  }
  const GibbsPlan plan = gibbs_L_sigma(model, a.beta0, a.beta);
  double log_n = a.log_n;
  if (cmd.count("--n") > 0) {
    log_n = std::log(a.n);
  } else if (cmd.count("--log-n") == 0) {
    log_n = std::log(10000.0);
  }
  const auto n = static_cast<std::int64_t>(std::ceil(std::exp(log_n) - 1e-9));
  const double q = thermo_q(thermo, a.beta0, a.beta);
  const double b = log_n / thermo.scale(a.N);
  const RegimeVerdict verdict = classify_regime(b, q);
  const ZhatResult z = zhat_estimate(model, a.beta0, a.beta, n, g.seed);
  emit("model", model.name());
  emit("L", plan.L);
  emit("sigma", plan.sigma);
  emit("log_n", log_n);
  emit("b", b);
  emit("q_beta", q);
  emit("verdict", to_string(verdict.regime));
  emit("qn_prediction", to_string(verdict.qn));
  if (z.ratio) {
    emit("ratio", *z.ratio);
  }
  emit("log_zhat", z.log_zhat);
  emit("qnN", z.q_statistic);
  if (!g.out.empty()) {
    CsvReport report;
    report.header = {"N", "beta0", "beta", "L", "sigma", "log_n", "b", "q_beta", "verdict", "ratio", "qnN"};
    report.rows.push_back({fmt::format("{}", a.N), csv_number(a.beta0), csv_number(a.beta), csv_number(plan.L),
                           csv_number(plan.sigma), csv_number(log_n), csv_number(b), csv_number(q),
                           std::string(to_string(verdict.regime)), z.ratio ? csv_number(*z.ratio) : "nan",
                           csv_number(z.q_statistic)});
    report.footer = {fmt::format("seed={}", g.seed), fmt::format("version={}", kVersion)};
    report.write(g.out);
  }
  return 0;
}

const std::vector<std::string> kPathHeader{"draw", "T_or_length", "log_weight", "reached", "through_center"};

int cmd_monotone(int n, std::size_t samples, const Globals& g) {
  if (samples == 0) {
    throw DomainError("need at least one sample");
  }
  Rng rng{g.seed};
  CsvReport report;
  report.header = kPathHeader;
  LogSumExp weights;
  double total_t = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const MonotonePathSample s = sample_monotone_path(n, rng);
    weights.add(s.log_rho());
    total_t += s.T;
    if (!g.out.empty()) {
      report.rows.push_back({fmt::format("{}", i), fmt::format("{}", s.T), csv_number(s.log_rho()), "1", "NA"});
    }
  }
  const MonotoneL L = monotone_L(n);
  emit("L", L.exact);
  emit("L_asymptotic", L.asymptotic);
  emit("mean_T", total_t / static_cast<double>(samples));
  emit("mean_weight", std::exp(weights.value() - std::log(static_cast<double>(samples))));
  emit("Q_n", std::exp(weights.max() - weights.value()));
  if (!g.out.empty()) {
    report.footer = {fmt::format("seed={}", g.seed), fmt::format("version={}", kVersion)};
    report.write(g.out);
  }
  return 0;
}

int cmd_saw(int m, std::size_t samples, const std::string& proposal_name, const Globals& g) {
  const SawProposal proposal = parse_saw_proposal(proposal_name);
  const SawEstimate e = saw_estimate(m, samples, g.seed, proposal);
  emit("count", e.count);
  emit("count_std_error", e.count_std_error);
  emit("mean_length", e.mean_length);
  emit("center_fraction", e.center_fraction);
  emit("Q_n", e.q_n);
  emit("success_rate", e.success_rate);
  if (!g.out.empty()) {
    // Same streams as the estimate above, so the file lists exactly those draws.
    CsvReport report;
    report.header = kPathHeader;
    for (std::size_t chunk = 0; chunk * kSawChunkDraws < samples; ++chunk) {
      Rng rng = Rng::stream(g.seed, chunk);
      const std::size_t end = std::min(samples, (chunk + 1) * kSawChunkDraws);
      for (std::size_t i = chunk * kSawChunkDraws; i < end; ++i) {
        const SawSample s = sample_saw(m, rng, proposal);
        report.rows.push_back({fmt::format("{}", i), fmt::format("{}", s.length), csv_number(s.log_weight),
                               s.reached ? "1" : "0", s.visited_center ? "1" : "0"});
      }
    }
    report.footer = {fmt::format("seed={}", g.seed), fmt::format("version={}", kVersion)};
    report.write(g.out);
  }
  return 0;
}

struct RareArgs {
  int N = 100;
  double p = 0.9;
  double theta = 0.0;
  double n = 1e4;
  double step = 0.005;
  bool optimize = false;
};

int cmd_rare(const RareArgs& a, const Globals& g) {
  RareBinomialSpec spec{a.N, a.p, a.theta > 0.0 ? a.theta : a.p};
  const int k = spec.threshold();
  const double theta_star = optimal_tilt(a.N, a.p, a.step);
  if (a.optimize) {
    spec.theta = theta_star;
  }
  const BinomTail tail = binom_tail(a.N, k);
  const double la_exact = rare_LA(a.N, a.p, spec.theta, LaMode::ExactDirect);
  const double la_formula = rare_LA(a.N, a.p, spec.theta, LaMode::ExactFormula);
  const double la_asym = rare_LA(a.N, a.p, spec.theta, LaMode::Asymptotic);
  const RareRun run = rare_is_run(spec, static_cast<std::size_t>(std::llround(a.n)), g.seed);
  emit("b_exact", tail.value);
  emit("b_exact_log10", tail.log_value / std::log(10.0));
  emit("theta", spec.theta);
  emit("LA_exact", la_exact);
  emit("LA_formula", la_formula);
  emit("LA_asymptotic_as_printed", la_asym);
  emit("theta_star", theta_star);
  emit("estimate", run.estimate);
  emit("ratio", run.ratio);
  if (!g.out.empty()) {
    CsvReport report;
    report.header = {"N", "p", "theta", "b_exact_log10", "LA_exact", "LA_asymptotic", "theta_star", "estimate", "ratio"};
    report.rows.push_back({fmt::format("{}", a.N), csv_number(a.p), csv_number(spec.theta),
                           csv_number(tail.log_value / std::log(10.0)), csv_number(la_exact), csv_number(la_asym),
                           csv_number(theta_star), csv_number(run.estimate), csv_number(run.ratio)});
    report.footer = {fmt::format("seed={}", g.seed), fmt::format("version={}", kVersion)};
    report.write(g.out);
  }
  return 0;
}

int cmd_enumerate(const PairArgs& args, const Globals& g) {
  const Enumeration e = enumerate_pair(build_pair(args));
  CsvReport report;
  report.header = {"point", "mu_mass", "nu_mass", "log_rho"};
  for (const auto& row : e.rows) {
    report.rows.push_back({csv_number(row.point), csv_number(row.mu_mass), csv_number(row.nu_mass),
                           csv_number(row.log_rho)});
  }
  write_report(report, g.out, true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Importance sampling sample-size bounds, diagnostics and worked examples"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "CSV output path");
  app.add_option("--config", g.config, "key = value config file");
  app.add_option("--threads", g.threads, "OpenMP threads");
  app.add_option("--replicates", g.replicates, "replicate count");
  app.add_option("--qn-threshold", g.qn_threshold, "q_n convergence threshold");

  PairArgs pair_args;

  auto* kl = app.add_subcommand("kl", "KL divergence L = D(nu || mu)");
  std::string kl_method = "closed";
  std::size_t kl_samples = 100000;
  add_pair_options(kl, pair_args);
  kl->add_option("--method", kl_method, "closed, exact or mc");
  kl->add_option("--samples", kl_samples, "Monte Carlo samples");

  auto* bound = app.add_subcommand("bound", "error bound at a given sample size");
  double bound_log_n = 0.0;
  std::string bound_side = "upper";
  double bound_delta = 0.5;
  add_pair_options(bound, pair_args);
  bound->add_option("--log-n", bound_log_n, "natural log of the sample size")->required();
  bound->add_option("--side", bound_side, "upper or lower");
  bound->add_option("--delta", bound_delta, "deviation level of the lower bound");

  auto* samplesize = app.add_subcommand("samplesize", "sample size for a target mean absolute error");
  double target_error = 0.05;
  add_pair_options(samplesize, pair_args);
  samplesize->add_option("--error", target_error, "target error");

  auto* run = app.add_subcommand("run", "run a named experiment");
  std::string experiment;
  std::vector<double> run_grid;
  std::vector<std::string> run_sets;
  bool timing = false;
  run->add_option("--experiment", experiment, "fig1..fig5, large_binom_report, gibbs_sweep, rare_report");
  run->add_option("--n-grid", run_grid, "sample sizes")->delimiter(',');
  run->add_option("--set", run_sets, "experiment override key=value");
  run->add_flag("--timing", timing, "append wall-clock time to the footer");

  auto* diag = app.add_subcommand("diagnose", "q_n and variance diagnostics over a grid of n");
  std::vector<double> diag_grid;
  add_pair_options(diag, pair_args);
  diag->add_option("--n", diag_grid, "sample sizes")->delimiter(',');

  auto* gibbs = app.add_subcommand("gibbs", "free-energy importance sampling between Gibbs measures");
  gibbs->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  GibbsArgs gibbs_args;
  gibbs->add_option("--model", gibbs_args.model, "spins or ising");
  gibbs->add_option("--N", gibbs_args.N, "number of spins");
  gibbs->add_option("--J", gibbs_args.J, "Ising coupling");
  gibbs->add_option("--h", gibbs_args.h, "Ising field");
  gibbs->add_option("--beta0", gibbs_args.beta0, "sampling inverse temperature");
  gibbs->add_option("--beta", gibbs_args.beta, "target inverse temperature");
  gibbs->add_option("--n", gibbs_args.n, "sample size");
  gibbs->add_option("--log-n", gibbs_args.log_n, "natural log of the sample size");

  auto* paths = app.add_subcommand("paths", "sequential importance sampling of lattice paths");
  paths->require_subcommand(1);
  auto* monotone = paths->add_subcommand("monotone", "up/right paths on an n x n grid");
  int monotone_n = 10;
  std::size_t path_samples = 1000;
  monotone->add_option("--n", monotone_n, "grid size");
  monotone->add_option("--samples", path_samples, "draws");
  auto* saw = paths->add_subcommand("saw", "corner-to-corner self-avoiding walks");
  int saw_grid = 10;
  saw->add_option("--grid", saw_grid, "grid size in cells");
  saw->add_option("--samples", path_samples, "draws");
  std::string saw_proposal = "uniform";
  saw->add_option("--proposal", saw_proposal, "uniform (dead ends weigh zero) or avoid_traps (Knuth)");

  auto* rare = app.add_subcommand("rare", "tilted sampling of a binomial tail");
  RareArgs rare_args;
  rare->add_option("--N", rare_args.N, "trials");
  rare->add_option("--p", rare_args.p, "threshold fraction, N p integral");
  rare->add_option("--theta", rare_args.theta, "proposal success probability (default p)");
  rare->add_option("--n", rare_args.n, "sample size");
  rare->add_option("--step", rare_args.step, "tilt grid step");
  rare->add_flag("--optimize-theta", rare_args.optimize, "sample at the grid-optimal tilt");

  auto* enumerate = app.add_subcommand("enumerate", "dump a finite pair");
  add_pair_options(enumerate, pair_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    set_thread_count(g.threads);
    if (*kl) {
      return cmd_kl(pair_args, kl_method, kl_samples, g);
    }
    if (*bound) {
      return cmd_bound(pair_args, bound_log_n, bound_side, bound_delta);
    }
    if (*samplesize) {
      return cmd_samplesize(pair_args, target_error);
    }
    if (*run) {
      return cmd_run(app, g, experiment, run_grid, run_sets, timing);
    }
    if (*diag) {
      return cmd_diagnose(pair_args, diag_grid, g);
    }
    if (*gibbs) {
      return cmd_gibbs(gibbs_args, *gibbs, g);
    }
    if (*monotone) {
      return cmd_monotone(monotone_n, path_samples, g);
    }
    if (*saw) {
      return cmd_saw(saw_grid, path_samples, saw_proposal, g);
    }
    if (*rare) {
      return cmd_rare(rare_args, g);
    }
    if (*enumerate) {
      return cmd_enumerate(pair_args, g);
    }
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
