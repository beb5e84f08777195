// Copyright 2026 The backflow-lab Authors
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

// Closed-form qubit dynamical maps used as test dynamics, and trajectories of
// them sampled on a time grid.
//
// Time-dependent rates are sums of terms from a small analytic family whose
// integrals are known exactly, so no ODE integration enters a divisibility
// verdict.

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "backflow/channels.hpp"

namespace backflow {

/// One term of a rate function gamma(t), t measured from t0.
struct RateTerm {
  enum class Kind {
    kConst,      ///< a
    kTanh,       ///< a tanh(b t)
    kDampedCos,  ///< a exp(-b t) cos(omega t)
  };
  Kind kind = Kind::kConst;
  double a = 0.0;
  double b = 0.0;
  double omega = 0.0;

  double value(double t) const;
  /// Integral from 0 to t.
  double integral(double t) const;
};

using RateFunction = std::vector<RateTerm>;

double rate_value(const RateFunction& gamma, double t);
double rate_integral(const RateFunction& gamma, double t);

/// Qubit dephasing with coherence factor q(t) = exp(-2 int_0^t gamma);
/// throws CptpViolationError unless q in (0, 1].
QuantumChannel dephasing_at(double t, const RateFunction& gamma);

/// Pauli channel sum p_k sigma_k rho sigma_k with Pauli eigenvalues
/// lambda_j = exp(-2 int (gamma_k + gamma_l)), {j,k,l} = {1,2,3}. Throws
/// CptpViolationError when some p_k < 0.
QuantumChannel random_unitary_qubit_at(double t, const std::array<RateFunction, 3>& gammas);
/// Pauli eigenvalues (lambda_1, lambda_2, lambda_3) of the map above.
std::array<double, 3> pauli_eigenvalues(double t, const std::array<RateFunction, 3>& gammas);
/// gamma_1 = gamma_2 = 1, gamma_3 = -tanh t.
std::array<RateFunction, 3> eternal_rates();

/// Amplitude damping with real decoherence function G, |G| <= 1:
/// Kraus {[[1,0],[0,G]], [[0,sqrt(1-G^2)],[0,0]]}.
QuantumChannel amplitude_damping(double g);
/// G(t) = exp(-g_decay t) cos(g_freq t).
double damped_cosine(double t, double g_decay, double g_freq);
QuantumChannel amplitude_damping_at(double t, double g_decay, double g_freq);

/// rho -> e^{-rt} rho + (1 - e^{-rt}) I/2; rate >= 0.
QuantumChannel depolarizing_at(double t, double rate);

enum class DynamicsKind { kDephasing, kAmplitudeDamping, kRandomUnitaryQubit, kDepolarizing };

/// A named preset plus its parameters. Construct through the factories or
/// from_config, which validate the parameter keys.
struct DynamicsFamily {
  DynamicsKind kind = DynamicsKind::kDephasing;
  std::map<std::string, double> params;
  /// Only used by random_unitary_qubit ("eternal").
  std::string preset;
  /// Dephasing uses rates[0]; random_unitary_qubit uses all three.
  std::array<RateFunction, 3> rates;

  static DynamicsFamily dephasing(double gamma_const);
  static DynamicsFamily dephasing(RateFunction gamma);
  static DynamicsFamily amplitude_damping(double g_decay, double g_freq);
  static DynamicsFamily eternal();
  static DynamicsFamily depolarizing(double rate);

  /// Keys: "dephasing"(gamma_const), "amplitude_damping"(g_decay, g_freq),
  /// "random_unitary_qubit"(preset = "eternal"), "depolarizing"(rate).
  /// Throws ConfigError on unknown kinds, missing or unknown keys.
  static DynamicsFamily from_config(const std::string& kind,
                                    const std::map<std::string, double>& params,
                                    const std::string& preset = "");

  std::string kind_name() const;
  std::size_t dim() const noexcept { return 2; }
  /// Lambda(t0 + elapsed, t0).
  QuantumChannel at(double elapsed) const;
};

/// The preset names accepted by from_config.
std::vector<std::string> dynamics_kind_names();

struct Trajectory {
  DynamicsFamily family;
  double t0 = 0.0;
  std::vector<double> grid;
  std::vector<QuantumChannel> channels;
};

/// Builds Lambda(t, t0) on every grid point and checks CPTP (Choi min
/// eigenvalue >= -kPsdTol). grid must start at t0 and be strictly increasing.
Trajectory make_trajectory(const DynamicsFamily& family, double t0, std::vector<double> grid);

/// n evenly spaced points on [a, b] (n >= 1; n == 1 gives {a}).
std::vector<double> linspace(double a, double b, std::size_t n);

/// V(t_late, t_early) from the closed-form maps at those times.
IntermediateMap intermediate_map(const Trajectory& traj, double t_early, double t_late);
/// V between grid points k_early <= k_late.
IntermediateMap intermediate_map_at(const Trajectory& traj, std::size_t k_early,
                                    std::size_t k_late);
/// Verdicts on consecutive grid steps of the trajectory.
std::vector<DivisibilityStep> cp_divisibility_scan(const Trajectory& traj);

}  // namespace backflow
