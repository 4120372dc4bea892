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

#include "isamp/gibbs.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "isamp/errors.hpp"
#include "isamp/logspace.hpp"
#include "isamp/parallel.hpp"

namespace isamp {
namespace {

/// Value with first and second derivative, for exact F' and F'' of closed forms.
struct Dual2 {
  double v = 0.0;
  double d = 0.0;
  double dd = 0.0;
};

Dual2 operator+(Dual2 a, Dual2 b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Dual2 operator-(Dual2 a, Dual2 b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Dual2 operator*(Dual2 a, Dual2 b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd}; }
Dual2 operator*(double s, Dual2 a) { return {s * a.v, s * a.d, s * a.dd}; }

/// f(a) given f, f' and f'' at a.v.
Dual2 chain(Dual2 a, double f, double df, double d2f) { return {f, df * a.d, d2f * a.d * a.d + df * a.dd}; }

Dual2 exp(Dual2 a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
Dual2 log(Dual2 a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
Dual2 log1p(Dual2 a) { return chain(a, std::log1p(a.v), 1.0 / (1.0 + a.v), -1.0 / ((1.0 + a.v) * (1.0 + a.v))); }
Dual2 sqrt(Dual2 a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
Dual2 cosh(Dual2 a) { return chain(a, std::cosh(a.v), std::sinh(a.v), std::cosh(a.v)); }
Dual2 sinh(Dual2 a) { return chain(a, std::sinh(a.v), std::cosh(a.v), std::sinh(a.v)); }
Dual2 inverse(Dual2 a) { return chain(a, 1.0 / a.v, -1.0 / (a.v * a.v), 2.0 / (a.v * a.v * a.v)); }
Dual2 pow_int(Dual2 a, int n) {
  const double x = a.v;
  const double dn = n;
  const double f1 = n >= 1 ? dn * std::pow(x, n - 1) : 0.0;
  const double f2 = n >= 2 ? dn * (dn - 1.0) * std::pow(x, n - 2) : 0.0;
  return chain(a, std::pow(x, n), f1, f2);
}

struct Eigen2 {
  Dual2 lambda1;
  Dual2 lambda2;
};

Eigen2 transfer_eigenvalues(double coupling, double field, Dual2 beta) {
  const Dual2 bj = coupling * beta;
  const Dual2 bh = field * beta;
  const Dual2 sh = sinh(bh);
  const Dual2 root = sqrt(exp(2.0 * bj) * sh * sh + exp(-2.0 * bj));
  const Dual2 base = exp(bj) * cosh(bh);
  return {base + root, base - root};
}

/// F = N log lambda1 + log1p((lambda2 / lambda1)^N), with derivatives.
Dual2 ising_log_partition(int spins, double coupling, double field, double beta) {
  const Eigen2 eig = transfer_eigenvalues(coupling, field, Dual2{beta, 1.0, 0.0});
  const Dual2 ratio = eig.lambda2 * inverse(eig.lambda1);
  return static_cast<double>(spins) * log(eig.lambda1) + log1p(pow_int(ratio, spins));
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

FreeEnergy closed_form(const GibbsModel& model, double beta) {
  const auto n = static_cast<double>(model.size());
  if (model.kind() == GibbsModel::Kind::IndependentSpins) {
    const double sech = 1.0 / std::cosh(beta);
    return {n * (log_cosh(beta) + std::numbers::ln2), n * std::tanh(beta), n * sech * sech};
  }
  const Dual2 f = ising_log_partition(model.size(), model.coupling(), model.field(), beta);
  return {f.v, f.d, f.dd};
}

/// Partial sums over a block of states, rescaled by e^{shift}.
struct StateSums {
  double shift = kNegInf;
  long double s0 = 0.0L;
  long double s1 = 0.0L;
  long double s2 = 0.0L;

  void add(double log_w, double h) {
    if (log_w > shift) {
      const long double scale = std::exp(static_cast<long double>(shift - log_w));
      s0 *= scale;
      s1 *= scale;
      s2 *= scale;
      shift = log_w;
    }
    const long double w = std::exp(static_cast<long double>(log_w - shift));
    s0 += w;
    s1 += w * h;
    s2 += w * h * h;
  }

  void merge(const StateSums& o) {
    if (o.shift == kNegInf) {
      return;
    }
    if (o.shift > shift) {
      const long double scale = std::exp(static_cast<long double>(shift - o.shift));
      s0 = s0 * scale + o.s0;
      s1 = s1 * scale + o.s1;
      s2 = s2 * scale + o.s2;
      shift = o.shift;
    } else {
      const long double scale = std::exp(static_cast<long double>(o.shift - shift));
      s0 += o.s0 * scale;
      s1 += o.s1 * scale;
      s2 += o.s2 * scale;
    }
  }

  [[nodiscard]] FreeEnergy free_energy() const {
    const long double mean = s1 / s0;
    const long double var = std::max(s2 / s0 - mean * mean, 0.0L);
    return {shift + static_cast<double>(std::log(s0)), static_cast<double>(-mean), static_cast<double>(var)};
  }
};

void require_enumerable(const GibbsModel& model) {
  if (model.size() > kMaxEnumeratedSpins) {
    throw ResourceError(fmt::format("state enumeration is capped at {} spins, got {}", kMaxEnumeratedSpins, model.size()));
  }
}

/// Exact sequential sampler for the periodic chain at a fixed beta.
class ChainSampler {
 public:
  ChainSampler(const GibbsModel& model, double beta) : spins_{model.size()} {
    const double j = model.coupling();
    const double h = model.field();
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double s = a == 1 ? 1.0 : -1.0;
        const double t = b == 1 ? 1.0 : -1.0;
        log_v_[a][b] = beta * (j * s * t + 0.5 * h * (s + t));
      }
    }
    const double scale = std::max({log_v_[0][0], log_v_[0][1], log_v_[1][0], log_v_[1][1]});
    Mat v{};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        v[a][b] = std::exp(log_v_[a][b] - scale);
        v_[a][b] = v[a][b];
      }
    }
    // powers_[k] is V^k up to a positive factor, renormalized to keep entries in range.
    powers_.resize(static_cast<std::size_t>(spins_) + 1);
    powers_[0] = Mat{{{1.0, 0.0}, {0.0, 1.0}}};
    for (std::size_t k = 1; k < powers_.size(); ++k) {
      Mat m{};
      double top = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          m[a][b] = powers_[k - 1][a][0] * v[0][b] + powers_[k - 1][a][1] * v[1][b];
          top = std::max(top, m[a][b]);
        }
      }
      for (auto& row : m) {
        for (auto& x : row) {
          x /= top;
        }
      }
      powers_[k] = m;
    }
  }

  void sample(Rng& rng, std::span<std::int8_t> out) const {
    const auto n = static_cast<std::size_t>(spins_);
    const Mat& full = powers_[n];
    const int first = rng.uniform() * (full[0][0] + full[1][1]) < full[1][1] ? 1 : 0;
    out[0] = first == 1 ? 1 : -1;
    int prev = first;
    for (std::size_t i = 1; i < n; ++i) {
      const Mat& rest = powers_[n - i];
      const double w_minus = v_[prev][0] * rest[0][first];
      const double w_plus = v_[prev][1] * rest[1][first];
      const int next = rng.uniform() * (w_minus + w_plus) < w_plus ? 1 : 0;
      out[i] = next == 1 ? 1 : -1;
      prev = next;
    }
  }

 private:
  using Mat = std::array<std::array<double, 2>, 2>;
  int spins_;
  Mat log_v_{};
  Mat v_{};
  std::vector<Mat> powers_;
};

ZhatResult zhat_spins(const GibbsModel& model, double beta0, double beta, std::int64_t n, std::uint64_t seed) {
  // With k spins up, H = -(2k - N) and k ~ Binomial(N, 1 / (1 + e^{-2 beta0})) under G_beta0.
  const int spins = model.size();
  const double p_up = 1.0 / (1.0 + std::exp(-2.0 * beta0));
  std::vector<double> pmf(static_cast<std::size_t>(spins) + 1);
  for (int k = 0; k <= spins; ++k) {
    pmf[static_cast<std::size_t>(k)] =
        std::exp(log_choose(spins, k) + k * std::log(p_up) + (spins - k) * std::log1p(-p_up));
  }
  std::vector<double> tail(pmf.size() + 1, 0.0);
  for (std::size_t k = pmf.size(); k-- > 0;) {
    tail[k] = tail[k + 1] + pmf[k];
  }
  Rng rng{seed};
  std::int64_t remaining = n;
  LogSumExp weights;
  double max_single = kNegInf;  // largest weight of one draw, not of an aggregated group
  for (int k = 0; k <= spins && remaining > 0; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double p = k == spins ? 1.0 : std::min(1.0, pmf[i] / tail[i]);
    const std::int64_t count = rng.binomial(remaining, p);
    remaining -= count;
    if (count > 0) {
      const double w = (beta - beta0) * (2.0 * k - spins);
      weights.add(std::log(static_cast<double>(count)) + w);
      max_single = std::max(max_single, w);
    }
  }
  ZhatResult out;
  const double log_sum = weights.value();
  out.log_zhat = model.free_energy(beta0).F + log_sum - std::log(static_cast<double>(n));
  out.ratio = std::exp(out.log_zhat - model.free_energy(beta).F);
  out.q_statistic = std::exp(max_single - log_sum);
  return out;
}

ZhatResult zhat_chain(const GibbsModel& model, double beta0, double beta, std::int64_t n, std::uint64_t seed) {
  const ChainSampler sampler{model, beta0};
  Rng rng{seed};
  std::vector<std::int8_t> state(static_cast<std::size_t>(model.size()));
  LogSumExp weights;
  for (std::int64_t i = 0; i < n; ++i) {
    sampler.sample(rng, state);
    weights.add(-(beta - beta0) * model.hamiltonian(state));
  }
  ZhatResult out;
  const double log_sum = weights.value();
  out.log_zhat = model.free_energy(beta0).F + log_sum - std::log(static_cast<double>(n));
  out.ratio = std::exp(out.log_zhat - model.free_energy(beta).F);
  out.q_statistic = weights.max_share();
  return out;
}

constexpr std::int64_t kMaxChainDraws = 1'000'000'000;

std::int64_t sample_size_from_log(double log_n) {
  if (!(log_n < 43.0)) {
    throw ResourceError(fmt::format("sample size exp({}) does not fit in a 64-bit count", log_n));
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::exp(log_n))));
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace

GibbsModel GibbsModel::independent_spins(int spins) {
  if (spins < 1) {
    throw DomainError("need at least one spin");
  }
  return GibbsModel{Kind::IndependentSpins, spins, 0.0, 1.0};
}

GibbsModel GibbsModel::ising(int spins, double coupling, double field) {
  if (spins < 1) {
    throw DomainError("need at least one spin");
  }
  if (coupling < 0.0) {
    throw DomainError("Ising coupling J must be non-negative");
  }
  return GibbsModel{Kind::Ising, spins, coupling, field};
}

std::string GibbsModel::name() const {
  if (kind_ == Kind::IndependentSpins) {
    return fmt::format("spins(N={})", spins_);
  }
  return fmt::format("ising(N={},J={},h={})", spins_, coupling_, field_);
}

double GibbsModel::hamiltonian(std::span<const std::int8_t> spins) const {
  const std::size_t n = spins.size();
  double sum = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += spins[i];
    pairs += spins[i] * spins[(i + 1) % n];
  }
  if (kind_ == Kind::IndependentSpins) {
    return -sum;
  }
  return -coupling_ * pairs - field_ * sum;
}

double GibbsModel::hamiltonian_bits(std::uint64_t bits) const {
  const int n = spins_;
  const double sum = 2.0 * std::popcount(bits) - n;
  if (kind_ == Kind::IndependentSpins) {
    return -sum;
  }
  const std::uint64_t mask = n == 64 ? ~0ULL : (1ULL << static_cast<unsigned>(n)) - 1ULL;
  const std::uint64_t rotated = ((bits >> 1U) | ((bits & 1ULL) << static_cast<unsigned>(n - 1))) & mask;
  const double pairs = n - 2.0 * std::popcount(bits ^ rotated);
  return -coupling_ * pairs - field_ * sum;
}

FreeEnergy GibbsModel::free_energy(double beta, FreeEnergyMode mode) const {
  switch (mode) {
    case FreeEnergyMode::ClosedForm:
      return closed_form(*this, beta);
    case FreeEnergyMode::EnumerateStates:
      return enumerate_free_energy(*this, beta);
    case FreeEnergyMode::FiniteDifference:
      return finite_difference_free_energy([this](double b) { return closed_form(*this, b).F; }, beta);
  }
  return closed_form(*this, beta);
}

void GibbsModel::sample_at(double beta, Rng& rng, std::span<std::int8_t> out) const {
  if (out.size() != static_cast<std::size_t>(spins_)) {
    throw UsageError("output span must hold one entry per spin");
  }
  if (kind_ == Kind::IndependentSpins) {
    const double p_up = 1.0 / (1.0 + std::exp(-2.0 * beta));
    for (auto& s : out) {
      s = rng.uniform() < p_up ? 1 : -1;
    }
    return;
  }
  ChainSampler{*this, beta}.sample(rng, out);
}

namespace {

// States are summed in fixed blocks merged in block order, so both drivers give identical bits.
template <class Map>
FreeEnergy enumerate_blocks(const GibbsModel& model, double beta, Map&& map) {
  require_enumerable(model);
  const std::uint64_t states = 1ULL << static_cast<unsigned>(model.size());
  constexpr std::uint64_t kBlock = 1ULL << 12U;
  const std::uint64_t blocks = (states + kBlock - 1) / kBlock;
  const auto partial = map(blocks, [&](std::size_t b) {
    StateSums sums;
    const std::uint64_t end = std::min<std::uint64_t>(states, (b + 1) * kBlock);
    for (std::uint64_t s = b * kBlock; s < end; ++s) {
      const double h = model.hamiltonian_bits(s);
      sums.add(-beta * h, h);
    }
    return sums;
  });
  StateSums total;
  for (const auto& p : partial) {
    total.merge(p);
  }
  return total.free_energy();
}

}  // namespace

FreeEnergy enumerate_free_energy(const GibbsModel& model, double beta) {
  return enumerate_blocks(model, beta, [](std::size_t count, auto fn) { return map_replicates(count, fn); });
}

FreeEnergy enumerate_free_energy_serial(const GibbsModel& model, double beta) {
  return enumerate_blocks(model, beta, [](std::size_t count, auto fn) { return map_replicates_serial(count, fn); });
}

FreeEnergy finite_difference_free_energy(const std::function<double(double)>& F, double beta, double step) {
  const double scale = std::max(1.0, std::abs(beta));
  const double h1 = step > 0.0 ? step : 1e-4 * scale;
  const double h2 = step > 0.0 ? step : 1e-2 * scale;
  const double f0 = F(beta);
  auto first = [&](double h) { return (F(beta + h) - F(beta - h)) / (2.0 * h); };
  auto second = [&](double h) { return (F(beta + h) - 2.0 * f0 + F(beta - h)) / (h * h); };
  return {f0, (4.0 * first(0.5 * h1) - first(h1)) / 3.0, (4.0 * second(0.5 * h2) - second(h2)) / 3.0};
}

GibbsPlan gibbs_L_sigma(const GibbsModel& model, double beta0, double beta, FreeEnergyMode mode) {
  const FreeEnergy at0 = model.free_energy(beta0, mode);
  const FreeEnergy at = model.free_energy(beta, mode);
  GibbsPlan plan;
  plan.beta0 = beta0;
  plan.beta = beta;
  plan.L = at0.F - at.F - (beta0 - beta) * at.dF;
  if (plan.L < 1e-12) {
    plan.L = 0.0;
  }
  plan.sigma = std::abs(beta0 - beta) * std::sqrt(std::max(at.d2F, 0.0));
  return plan;
}

double thm4_bound(const GibbsPlan& plan, double delta, BoundSide side) {
  if (plan.r < 0.0) {
    throw DomainError("r must be non-negative");
  }
  if (plan.r == 0.0) {
    return kInf;
  }
  if (side == BoundSide::Upper) {
    return std::exp(-plan.r * plan.sigma / 4.0) + 4.0 / plan.r;
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
  return std::min(1.0, std::exp(-plan.r * plan.sigma / 2.0) + 4.0 / ((1.0 - delta) * plan.r * plan.r));
}

ZhatResult zhat_estimate(const GibbsModel& model, double beta0, double beta, std::int64_t n, std::uint64_t seed) {
  if (n < 1) {
    throw DomainError("sample size must be positive");
  }
  if (model.kind() == GibbsModel::Kind::IndependentSpins) {
    return zhat_spins(model, beta0, beta, n, seed);
  }
  if (n > kMaxChainDraws) {
    throw ResourceError("Ising sampling is limited to 10^9 draws");
  }
  return zhat_chain(model, beta0, beta, n, seed);
}

TransferResult ising_transfer(int spins, double coupling, double field, double beta) {
  if (spins < 1) {
    throw DomainError("need at least one spin");
  }
  const Eigen2 eig = transfer_eigenvalues(coupling, field, Dual2{beta, 0.0, 0.0});
  TransferResult out;
  out.lambda1 = eig.lambda1.v;
  out.lambda2 = eig.lambda2.v;
  out.F = ising_log_partition(spins, coupling, field, beta).v;
  out.Z = std::exp(out.F);
  return out;
}

ThermoModel spins_thermo() {
  ThermoModel m;
  m.name = "spins";
  m.p = [](double b) { return std::numbers::ln2 + log_cosh(b); };
  m.p_prime = [](double b) { return std::tanh(b); };
  m.scale = [](double n) { return n; };
  m.H_bound = 1.0;
  return m;
}

ThermoModel ising_thermo(double coupling, double field) {
  ThermoModel m;
  m.name = fmt::format("ising(J={},h={})", coupling, field);
  m.p = [=](double b) { return std::log(transfer_eigenvalues(coupling, field, Dual2{b, 0.0, 0.0}).lambda1.v); };
  m.p_prime = [=](double b) {
    const Dual2 l1 = transfer_eigenvalues(coupling, field, Dual2{b, 1.0, 0.0}).lambda1;
    return l1.d / l1.v;
  };
  m.scale = [](double n) { return n; };
  m.H_bound = coupling + std::abs(field);
  return m;
}

bool is_convex_on(const ThermoModel& model, double lo, double hi, int points) {
  const double step = (hi - lo) / (points - 1);
  for (int i = 1; i + 1 < points; ++i) {
    const double b = lo + i * step;
    const double second = model.p(b + step) - 2.0 * model.p(b) + model.p(b - step);
    if (second < -1e-12) {
      return false;
    }
  }
  for (int i = 1; i < points; ++i) {
    if (model.p_prime(lo + i * step) < model.p_prime(lo + (i - 1) * step) - 1e-12) {
      return false;
    }
  }
  return true;
}

double thermo_q(const ThermoModel& model, double beta0, double beta) {
  return std::max(0.0, model.p(beta0) - model.p(beta) - (beta0 - beta) * model.p_prime(beta));
}

RegimeVerdict classify_regime(double b, double q_beta) {
  if (!(b >= 0.0) || !(q_beta >= 0.0)) {
    throw DomainError("b and q(beta) must be non-negative");
  }
  if (std::abs(b - q_beta) <= kRegimeTolerance) {
    return {Regime::CriticalFreeEnergyOnly, QnPrediction::NotExponentiallySmall};
  }
  if (b > q_beta) {
    return {Regime::Converges, QnPrediction::ExponentiallySmall};
  }
  return {Regime::Fails, QnPrediction::NotExponentiallySmall};
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Converges:
      return "Converges";
    case Regime::Fails:
      return "Fails";
    case Regime::CriticalFreeEnergyOnly:
      return "CriticalFreeEnergyOnly";
  }
  return "?";
}

std::string_view to_string(QnPrediction prediction) {
  return prediction == QnPrediction::ExponentiallySmall ? "exponentially small" : "not exponentially small";
}

namespace {

template <class Mapper>
PhaseCheck phase_check_with(Mapper&& mapper, const GibbsModel& model, double beta0, double beta, double log_n,
                            std::size_t replicates, std::uint64_t seed) {
  if (replicates < 2) {
    throw UsageError("at least two replicates are needed");
  }
  PhaseCheck out;
  out.n = sample_size_from_log(log_n);
  const auto runs = mapper(replicates, [&](std::size_t r) {
    return zhat_estimate(model, beta0, beta, out.n, derive_seed(seed, r));
  });
  std::vector<double> ratios;
  std::vector<double> qs;
  for (const auto& run : runs) {
    ratios.push_back(run.ratio.value_or(0.0));
    qs.push_back(run.q_statistic);
  }
  out.median_ratio = median(ratios);
  out.qn = summarize(qs);
  return out;
}

}  // namespace

PhaseCheck run_phase_check(const GibbsModel& model, double beta0, double beta, double log_n, std::size_t replicates,
                           std::uint64_t seed) {
  return phase_check_with([](std::size_t c, auto&& fn) { return map_replicates(c, fn); }, model, beta0, beta, log_n,
                          replicates, seed);
}

PhaseCheck run_phase_check_serial(const GibbsModel& model, double beta0, double beta, double log_n,
                                  std::size_t replicates, std::uint64_t seed) {
  return phase_check_with([](std::size_t c, auto&& fn) { return map_replicates_serial(c, fn); }, model, beta0, beta,
                          log_n, replicates, seed);
}

}  // namespace isamp
