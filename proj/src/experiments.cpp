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

#include "isamp/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "isamp/bounds.hpp"
#include "isamp/errors.hpp"
#include "isamp/estimators.hpp"
#include "isamp/gibbs.hpp"
#include "isamp/model.hpp"
#include "isamp/paths.hpp"
#include "isamp/rare_event.hpp"

namespace isamp {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw UsageError(fmt::format("{}: '{}' is not a number", key, text));
  }
  return value;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw UsageError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) {
      out.push_back(parse_double(key, t));
    }
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    return false;
  }
  throw UsageError(fmt::format("{}: '{}' is not a boolean", key, text));
}

std::size_t as_count(double n) { return static_cast<std::size_t>(std::llround(n)); }

std::string count_text(double n) { return fmt::format("{}", as_count(n)); }

class Settings {
 public:
  explicit Settings(const ExperimentConfig& config) : config_{config} {}

  [[nodiscard]] double number(const std::string& key, double fallback) const {
    const auto it = config_.overrides.find(key);
    return it == config_.overrides.end() ? fallback : parse_double(key, it->second);
  }
  [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = config_.overrides.find(key);
    return it == config_.overrides.end() ? fallback : it->second;
  }
  [[nodiscard]] std::vector<double> grid(ExperimentKind kind) const {
    return config_.n_grid.empty() ? default_grid(kind) : config_.n_grid;
  }
  [[nodiscard]] std::size_t replicates(std::size_t fallback) const { return config_.replicates.value_or(fallback); }
  [[nodiscard]] std::uint64_t seed() const { return config_.seed; }

 private:
  const ExperimentConfig& config_;
};

double thm1_at(double log_n, double L, double f_norm, const TailModel& tail) {
  const double t = log_n - L;
  if (t < 0.0) {
    return kInf;  // below the KL threshold the bound says nothing
  }
  return thm1_bound({L, t, f_norm, 0.5, BoundSide::Upper}, tail);
}

CsvReport mad_figure(ExperimentKind kind, const Settings& s, const PairModel& pair, const Integrand& f) {
  const double exact = exact_integral(pair, f);
  const double L = kl_divergence(pair, KlMethod::ClosedForm).value;
  const double f_norm = l2_norm(pair, f);
  const TailModel tail = tail_model_for(pair);
  const auto grid = s.grid(kind);
  const std::size_t reps = s.replicates(kDefaultMadReplicates);
  CsvReport report;
  report.header = {"n", "mad", "thm1_bound"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t n = as_count(grid[i]);
    const McEstimate mad = estimate_mad(pair, f, n, reps, exact, derive_seed(s.seed(), i));
    report.rows.push_back(
        {count_text(grid[i]), csv_number(mad.mean), csv_number(thm1_at(std::log(static_cast<double>(n)), L, f_norm, tail))});
  }
  return report;
}

PairModel flaw_pair() { return binomial_pair(100, 0.5, 0.7); }

CsvReport fig3(const Settings& s) {
  const PairModel pair = flaw_pair();
  const auto grid = s.grid(ExperimentKind::Fig3);
  Rng rng{derive_seed(s.seed(), 0)};
  WeightAccumulator acc;
  CsvReport report;
  report.header = {"n", "sqrt_v_n", "abs_err"};
  for (const double target : grid) {
    while (acc.count() < as_count(target)) {
      acc.add(pair.draw(rng).cached_log_weight);
    }
    report.rows.push_back({count_text(target), csv_number(std::sqrt(acc.empirical_variance())),
                           csv_number(std::abs(acc.estimate_In() - 1.0))});
  }
  return report;
}

CsvReport fig4(const Settings& s) {
  const PairModel pair = flaw_pair();
  const auto grid = s.grid(ExperimentKind::Fig4);
  const std::size_t reps = s.replicates(kDefaultQnReplicates);
  CsvReport report;
  report.header = {"n", "sqrt_v_n", "q_n_mean", "q_n_se"};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto reports = simulate_reports(pair, Integrand::one(), as_count(grid[i]), reps, derive_seed(s.seed(), i));
    double root_v = 0.0;
    std::vector<double> q(reports.size());
    for (std::size_t r = 0; r < reports.size(); ++r) {
      root_v += std::sqrt(reports[r].v_n);
      q[r] = reports[r].Q_n;
    }
    const McEstimate qn = summarize(q);
    report.rows.push_back({count_text(grid[i]), csv_number(root_v / static_cast<double>(reports.size())),
                           csv_number(qn.mean), csv_number(qn.std_error)});
  }
  return report;
}

CsvReport fig5(const Settings& s) {
  const int m = static_cast<int>(s.number("grid_size", 10));
  const auto trajectories = static_cast<std::size_t>(s.number("trajectories", 31));
  const SawProposal proposal = parse_saw_proposal(s.text("proposal", "avoid_traps"));
  const auto grid = s.grid(ExperimentKind::Fig5);
  std::vector<std::size_t> sizes(grid.size());
  std::transform(grid.begin(), grid.end(), sizes.begin(), as_count);
  const auto runs = map_replicates(
      trajectories, [&](std::size_t t) { return saw_q_trajectory(m, sizes, derive_seed(s.seed(), t), proposal); });
  CsvReport report;
  report.header.push_back("n");
  for (std::size_t t = 0; t < trajectories; ++t) {
    report.header.push_back(fmt::format("Q_{}", t + 1));
  }
  report.header.push_back("mean");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<std::string> row{fmt::format("{}", sizes[i])};
    double total = 0.0;
    for (const auto& run : runs) {
      row.push_back(csv_number(run[i]));
      total += run[i];
    }
    row.push_back(csv_number(total / static_cast<double>(trajectories)));
    report.rows.push_back(std::move(row));
  }
  return report;
}

CsvReport large_binom_report(const Settings& s) {
  const PairModel pair = large_binomial_pair();
  const LogRhoMoments m = logrho_moments(pair);
  const TailModel tail = tail_model_for(pair);
  const double upper_log_n = s.number("upper_log_n", 3.72e5);
  const double lower_log_n = s.number("lower_log_n", 3.65e5);
  const double delta = s.number("delta", 0.5);
  const double upper = thm1_bound({m.mean, upper_log_n - m.mean, 1.0, delta, BoundSide::Upper}, tail);
  const double lower = thm1_bound({m.mean, m.mean - lower_log_n, 1.0, delta, BoundSide::Lower}, tail);
  const double variance_exponent = exact_variance(pair, Integrand::one()).log_value;
  CsvReport report;
  report.header = {"quantity", "value"};
  report.rows = {
      {"L", csv_number(m.mean)},
      {"sd", csv_number(m.sd)},
      {"upper_log_n", csv_number(upper_log_n)},
      {"thm1_upper", csv_number(upper)},
      {"lower_log_n", csv_number(lower_log_n)},
      {"thm1_lower", csv_number(lower)},
      {"variance_log_exponent", csv_number(variance_exponent)},
  };
  return report;
}

CsvReport gibbs_sweep(const Settings& s) {
  struct Case {
    GibbsModel model;
    double beta0;
    double beta;
    ThermoModel thermo;
  };
  std::vector<Case> cases;
  for (const int n : {10, 25, 50}) {
    cases.push_back({GibbsModel::independent_spins(n), 0.0, 1.0, spins_thermo()});
  }
  for (const int n : {10, 25, 50}) {
    cases.push_back({GibbsModel::ising(n, 1.0, 0.0), 0.0, 0.5, ising_thermo(1.0, 0.0)});
  }
  const std::vector<double> multipliers{0.5, 1.5};
  CsvReport report;
  report.header = {"N", "beta0", "beta", "L", "sigma", "log_n", "b", "q_beta", "verdict", "ratio", "qnN"};
  std::size_t row = 0;
  for (const auto& c : cases) {
    const GibbsPlan plan = gibbs_L_sigma(c.model, c.beta0, c.beta);
    const double q = thermo_q(c.thermo, c.beta0, c.beta);
    const double scale = c.thermo.scale(c.model.size());
    for (const double mult : multipliers) {
      const double b = mult * q;
      const double log_n = b * scale;
      const auto n = static_cast<std::int64_t>(std::ceil(std::exp(log_n)));
      const ZhatResult z = zhat_estimate(c.model, c.beta0, c.beta, n, derive_seed(s.seed(), row++));
      const RegimeVerdict verdict = classify_regime(b, q);
      report.rows.push_back({fmt::format("{}", c.model.size()), csv_number(c.beta0), csv_number(c.beta),
                             csv_number(plan.L), csv_number(plan.sigma), csv_number(log_n), csv_number(b),
                             csv_number(q), std::string(to_string(verdict.regime)),
                             z.ratio ? csv_number(*z.ratio) : std::string("nan"), csv_number(z.q_statistic)});
    }
  }
  return report;
}

CsvReport rare_report(const Settings& s) {
  const auto n = as_count(s.number("n", 1e4));
  const double step = s.number("grid_step", 0.005);
  const std::vector<std::pair<int, double>> specs{{4, 0.75}, {20, 0.8}, {100, 0.9}};
  CsvReport report;
  report.header = {"N", "p", "theta", "b_exact_log10", "LA_exact", "LA_asymptotic", "theta_star", "estimate", "ratio"};
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto [N, p] = specs[i];
    const RareBinomialSpec spec{N, p, p};
    const BinomTail tail = binom_tail(N, spec.threshold());
    const RareRun run = rare_is_run(spec, n, derive_seed(s.seed(), i));
    report.rows.push_back({fmt::format("{}", N), csv_number(p), csv_number(p),
                           csv_number(tail.log_value / std::log(10.0)),
                           csv_number(rare_LA(N, p, p, LaMode::ExactDirect)),
                           csv_number(rare_LA(N, p, p, LaMode::Asymptotic)), csv_number(optimal_tilt(N, p, step)),
                           csv_number(run.estimate), csv_number(run.ratio)});
  }
  return report;
}

}  // namespace

ExperimentKind parse_experiment(std::string_view name) {
  static const std::map<std::string_view, ExperimentKind> kNames{
      {"fig1", ExperimentKind::Fig1},
      {"fig2", ExperimentKind::Fig2},
      {"fig3", ExperimentKind::Fig3},
      {"fig4", ExperimentKind::Fig4},
      {"fig5", ExperimentKind::Fig5},
      {"large_binom_report", ExperimentKind::LargeBinomReport},
      {"gibbs_sweep", ExperimentKind::GibbsSweep},
      {"rare_report", ExperimentKind::RareReport},
  };
  const auto it = kNames.find(name);
  if (it == kNames.end()) {
    throw UsageError(fmt::format("unknown experiment '{}'", name));
  }
  return it->second;
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Fig1:
      return "fig1";
    case ExperimentKind::Fig2:
      return "fig2";
    case ExperimentKind::Fig3:
      return "fig3";
    case ExperimentKind::Fig4:
      return "fig4";
    case ExperimentKind::Fig5:
      return "fig5";
    case ExperimentKind::LargeBinomReport:
      return "large_binom_report";
    case ExperimentKind::GibbsSweep:
      return "gibbs_sweep";
    case ExperimentKind::RareReport:
      return "rare_report";
  }
  return "unknown";
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    experiment = value;
  } else if (key == "seed") {
    seed = parse_u64(key, value);
  } else if (key == "n_grid") {
    n_grid = parse_list(key, value);
  } else if (key == "replicates") {
    replicates = static_cast<std::size_t>(parse_u64(key, value));
  } else if (key == "output_path" || key == "out") {
    output_path = value;
  } else if (key == "timing") {
    timing = parse_bool(key, value);
  } else {
    overrides[key] = value;
  }
}

void ExperimentConfig::validate() const {
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(n_grid[i] >= 1.0)) {
      throw UsageError(fmt::format("n_grid entries must be at least 1, got {}", n_grid[i]));
    }
    if (i > 0 && !(n_grid[i] > n_grid[i - 1])) {
      throw UsageError("n_grid must be strictly increasing");
    }
  }
  if (replicates && *replicates < 2) {
    throw UsageError("replicates must be at least 2");
  }
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("config line {}: expected 'key = value'", number));
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw UsageError(fmt::format("config line {}: empty key", number));
    }
    base.set(key, trim(std::string_view(body).substr(eq + 1)));
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot read config '{}'", path));
  }
  return parse_config(in, std::move(base));
}

std::string csv_number(double x) { return fmt::format("{:.17g}", x); }

std::string console_number(double x) { return fmt::format("{:.6g}", x); }

std::string CsvReport::str() const {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out += i == 0 ? "" : ",";
      out += cells[i];
    }
    out += '\n';
  };
  append_row(header);
  for (const auto& row : rows) {
    append_row(row);
  }
  for (const auto& w : warnings) {
    out += fmt::format("# warning: {}\n", w);
  }
  for (const auto& f : footer) {
    out += fmt::format("# {}\n", f);
  }
  return out;
}

void CsvReport::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot write '{}'", path));
  }
  out << str();
  out.flush();
  if (!out) {
    throw IoError(fmt::format("write to '{}' failed", path));
  }
}

std::vector<double> log_spaced_grid(double lo, double hi, int points) {
  std::vector<double> out;
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    const double x = points == 1 ? lo : std::round(std::pow(10.0, a + (b - a) * i / (points - 1)));
    if (out.empty() || x > out.back()) {
      out.push_back(x);
    }
  }
  return out;
}

std::vector<double> default_grid(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Fig1:
      return log_spaced_grid(10, 1e5, 13);
    case ExperimentKind::Fig2:
      return {3, 7, 20, 55, 148, 400, 1097, 2981, 8103, 22026};
    case ExperimentKind::Fig3:
    case ExperimentKind::Fig4:
      return log_spaced_grid(1, 1e6, 25);
    case ExperimentKind::Fig5:
      return log_spaced_grid(10, 1e5, 17);
    default:
      return {};
  }
}

CsvReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ExperimentKind kind = parse_experiment(config.experiment);
  const Settings settings{config};
  const auto start = std::chrono::steady_clock::now();
  CsvReport report;
  switch (kind) {
    case ExperimentKind::Fig1:
      report = mad_figure(kind, settings, exp12_pair(), Integrand::identity());
      break;
    case ExperimentKind::Fig2:
      report = mad_figure(kind, settings, binomial_pair(100, 0.5, 0.55), Integrand::one());
      break;
    case ExperimentKind::Fig3:
      report = fig3(settings);
      break;
    case ExperimentKind::Fig4:
      report = fig4(settings);
      break;
    case ExperimentKind::Fig5:
      report = fig5(settings);
      break;
    case ExperimentKind::LargeBinomReport:
      report = large_binom_report(settings);
      break;
    case ExperimentKind::GibbsSweep:
      report = gibbs_sweep(settings);
      break;
    case ExperimentKind::RareReport:
      report = rare_report(settings);
      break;
  }
  report.footer.push_back(fmt::format("experiment={}", to_string(kind)));
  report.footer.push_back(fmt::format("seed={}", config.seed));
  report.footer.push_back(fmt::format("version={}", kVersion));
  if (config.timing) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.footer.push_back(fmt::format("wall_clock_s={:.3f}", elapsed.count()));
  }
  return report;
}

std::string_view qn_verdict(const McEstimate& qn, double threshold) {
  return qn.mean + 2.0 * qn.std_error < threshold ? kConvergedVerdict : kNotConvergedVerdict;
}

CsvReport diagnose(const DiagnoseRequest& request) {
  if (request.replicates < 2) {
    throw UsageError("replicates must be at least 2");
  }
  const PairModel pair = isamp::make_pair(request.pair, request.params);
  const double exact = exact_integral(pair, Integrand::one());
  CsvReport report;
  report.header = {"n", "I_n", "J_n", "v_n", "sqrt_v_n", "Q_n", "q_n_mean", "q_n_se", "abs_err", "verdict"};
  bool converged_early = false;
  for (std::size_t i = 0; i < request.n_grid.size(); ++i) {
    const std::size_t n = as_count(request.n_grid[i]);
    const auto reports =
        simulate_reports(pair, Integrand::one(), n, request.replicates, derive_seed(request.seed, i));
    std::vector<double> q(reports.size());
    std::transform(reports.begin(), reports.end(), q.begin(), [](const DiagnosticReport& r) { return r.Q_n; });
    const McEstimate qn = summarize(q);
    const DiagnosticReport& first = reports.front();
    const std::string_view verdict = qn_verdict(qn, request.qn_threshold);
    report.rows.push_back({fmt::format("{}", n), csv_number(first.I_n), csv_number(first.J_n), csv_number(first.v_n),
                           csv_number(std::sqrt(first.v_n)), csv_number(first.Q_n), csv_number(qn.mean),
                           csv_number(qn.std_error), csv_number(std::abs(first.I_n - exact)), std::string(verdict)});
    if (const auto* c = std::get_if<CounterexampleFamily>(&pair.family());
        c != nullptr && verdict == kConvergedVerdict && static_cast<double>(n) < static_cast<double>(c->size)) {
      converged_early = true;
    }
  }
  if (converged_early) {
    report.warnings.push_back(
        "q_n reports convergence on the counterexample pair, but I_n(1) stays near 1/2 until n is much larger than N");
  }
  report.footer.push_back(fmt::format("pair={}", pair.name()));
  report.footer.push_back(fmt::format("seed={}", request.seed));
  report.footer.push_back(fmt::format("version={}", kVersion));
  return report;
}

}  // namespace isamp
