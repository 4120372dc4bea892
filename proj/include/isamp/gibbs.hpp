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

#ifndef ISAMP_GIBBS_HPP
#define ISAMP_GIBBS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "isamp/bounds.hpp"
#include "isamp/parallel.hpp"
#include "isamp/rng.hpp"

/**
 * \file
 * \brief Importance sampling between Gibbs measures on {-1, 1}^N.
 *
 * G_beta has density exp(-beta H(x)) / Z(beta) against counting measure, F(beta) = log Z(beta),
 * F' = -E H and F'' = Var H under G_beta. Sampling from G_beta0 and reweighting by
 * exp(-(beta - beta0) H) estimates Z(beta); the sample size needed is about exp(L) with
 * L = F(beta0) - F(beta) - (beta0 - beta) F'(beta).
 */

namespace isamp {

struct FreeEnergy {
  double F = 0.0;
  double dF = 0.0;
  double d2F = 0.0;
};

enum class FreeEnergyMode { ClosedForm, EnumerateStates, FiniteDifference };

inline constexpr int kMaxEnumeratedSpins = 24;

/// Independent spins (H = -sum x_i) or the periodic 1D Ising chain (H = -J sum x_i x_{i+1} - h sum x_i).
class GibbsModel {
 public:
  enum class Kind { IndependentSpins, Ising };

  static GibbsModel independent_spins(int spins);
  static GibbsModel ising(int spins, double coupling, double field);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int size() const { return spins_; }
  [[nodiscard]] double coupling() const { return coupling_; }
  [[nodiscard]] double field() const { return field_; }
  [[nodiscard]] std::string name() const;

  [[nodiscard]] double hamiltonian(std::span<const std::int8_t> spins) const;
  /// H of the configuration whose bit i set means spin i is +1 (size() <= 64).
  [[nodiscard]] double hamiltonian_bits(std::uint64_t bits) const;

  /// Throws ResourceError when enumeration is requested for more than 24 spins.
  [[nodiscard]] FreeEnergy free_energy(double beta, FreeEnergyMode mode = FreeEnergyMode::ClosedForm) const;

  /// One exact draw from G_beta.
  void sample_at(double beta, Rng& rng, std::span<std::int8_t> out) const;

 private:
  GibbsModel(Kind kind, int spins, double coupling, double field)
      : kind_{kind}, spins_{spins}, coupling_{coupling}, field_{field} {}

  Kind kind_;
  int spins_;
  double coupling_;
  double field_;
};

/// Exact F, F', F'' by summing over all 2^N states, OpenMP-parallel over state blocks.
FreeEnergy enumerate_free_energy(const GibbsModel& model, double beta);
/// Serial reference for `enumerate_free_energy`.
FreeEnergy enumerate_free_energy_serial(const GibbsModel& model, double beta);

/// Central differences of F with Richardson extrapolation. `step <= 0` picks 1e-4 max(1, |beta|)
/// for F' and 1e-2 max(1, |beta|) for F''.
FreeEnergy finite_difference_free_energy(const std::function<double(double)>& F, double beta, double step = 0.0);

struct GibbsPlan {
  double beta0 = 0.0;
  double beta = 0.0;
  double L = 0.0;
  double sigma = 0.0;
  double r = 0.0;  ///< slack in units of sigma: n = exp(L +- r sigma)

  [[nodiscard]] double log_n_upper() const { return L + r * sigma; }
  [[nodiscard]] double log_n_lower() const { return L - r * sigma; }
};

/// L = F(beta0) - F(beta) - (beta0 - beta) F'(beta), sigma = |beta0 - beta| sqrt(F''(beta)).
GibbsPlan gibbs_L_sigma(const GibbsModel& model, double beta0, double beta,
                        FreeEnergyMode mode = FreeEnergyMode::ClosedForm);

/// Upper: e^{-r sigma/4} + 4/r. Lower: min(1, e^{-r sigma/2} + 4/((1-delta) r^2)). +inf when r == 0.
double thm4_bound(const GibbsPlan& plan, double delta, BoundSide side);

struct ZhatResult {
  std::optional<double> ratio;  ///< Zhat_n(beta) / Z(beta)
  double log_zhat = 0.0;
  double q_statistic = 0.0;     ///< Q_{n,N} of the same draws
};

/// Zhat_n(beta) = Z(beta0)/n sum exp(-(beta - beta0) H(X_i)), X_i ~ G_beta0 i.i.d.
/// Independent spins are sampled through the multinomial law of the number of +1 spins, so n may
/// be astronomically large.
ZhatResult zhat_estimate(const GibbsModel& model, double beta0, double beta, std::int64_t n, std::uint64_t seed);

struct TransferResult {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double Z = 0.0;  ///< may overflow to +inf; F is always finite
  double F = 0.0;
};

/// Eigenvalues of the 1D Ising transfer matrix and Z = lambda1^N + lambda2^N.
TransferResult ising_transfer(int spins, double coupling, double field, double beta);

/// Thermodynamic limit p(beta) = lim F_N(beta) / L_N.
struct ThermoModel {
  std::string name;
  std::function<double(double)> p;
  std::function<double(double)> p_prime;
  std::function<double(double)> scale;  ///< L_N as a function of N
  double H_bound = 1.0;                 ///< |H_N| <= H_bound * L_N
};

ThermoModel spins_thermo();
ThermoModel ising_thermo(double coupling, double field);

/// Convexity of p and monotonicity of p' on an evenly spaced grid.
bool is_convex_on(const ThermoModel& model, double lo, double hi, int points);

/// q(beta) = p(beta0) - p(beta) - (beta0 - beta) p'(beta), clamped at 0.
double thermo_q(const ThermoModel& model, double beta0, double beta);

enum class Regime { Converges, Fails, CriticalFreeEnergyOnly };
enum class QnPrediction { ExponentiallySmall, NotExponentiallySmall };

struct RegimeVerdict {
  Regime regime;
  QnPrediction qn;
};

inline constexpr double kRegimeTolerance = 1e-12;

/// b = lim log(n) / L_N against q(beta); |b - q| <= 1e-12 counts as equality.
RegimeVerdict classify_regime(double b, double q_beta);

std::string_view to_string(Regime regime);
std::string_view to_string(QnPrediction prediction);

/// Replicated Zhat runs at n = ceil(exp(log_n)).
struct PhaseCheck {
  std::int64_t n = 0;
  double median_ratio = 0.0;
  McEstimate qn;  ///< mean of Q_{n,N} over replicates
};

PhaseCheck run_phase_check(const GibbsModel& model, double beta0, double beta, double log_n, std::size_t replicates,
                           std::uint64_t seed);
PhaseCheck run_phase_check_serial(const GibbsModel& model, double beta0, double beta, double log_n,
                                  std::size_t replicates, std::uint64_t seed);

}  // namespace isamp

#endif  // ISAMP_GIBBS_HPP
