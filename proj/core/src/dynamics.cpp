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

#include "backflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "backflow/errors.hpp"
#include "backflow/parallel.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

namespace {

// log cosh without overflow.
double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

std::vector<CMatrix> pauli_kraus(const std::array<double, 4>& p) {
  const std::array<CMatrix, 4> sigma{CMatrix::identity(2), pauli::x(), pauli::y(), pauli::z()};
  std::vector<CMatrix> kraus;
  for (std::size_t k = 0; k < 4; ++k)
    if (p[k] > 0.0) kraus.push_back(std::sqrt(p[k]) * sigma[k]);
  return kraus;
}

double require_param(const std::map<std::string, double>& params, const std::string& key,
                     const std::string& kind) {
  const auto it = params.find(key);
  if (it == params.end())
    throw ConfigError("dynamics '" + kind + "' requires parameter '" + key + "'");
  if (!std::isfinite(it->second))
    throw ConfigError("dynamics parameter '" + key + "' must be finite");
  return it->second;
}

void reject_unknown(const std::map<std::string, double>& params,
                    std::initializer_list<const char*> allowed, const std::string& kind) {
  for (const auto& [key, value] : params) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("dynamics '" + kind + "' does not take parameter '" + key + "'");
  }
}

}  // namespace

double RateTerm::value(double t) const {
  switch (kind) {
    case Kind::kConst:
      return a;
    case Kind::kTanh:
      return a * std::tanh(b * t);
    case Kind::kDampedCos:
      return a * std::exp(-b * t) * std::cos(omega * t);
  }
  return 0.0;
}

double RateTerm::integral(double t) const {
  switch (kind) {
    case Kind::kConst:
      return a * t;
    case Kind::kTanh:
      if (b == 0.0) return 0.0;
      return a / b * log_cosh(b * t);
    case Kind::kDampedCos: {
      const double den = b * b + omega * omega;
      if (den == 0.0) return a * t;
      return a * (std::exp(-b * t) * (omega * std::sin(omega * t) - b * std::cos(omega * t)) + b) /
             den;
    }
  }
  return 0.0;
}

double rate_value(const RateFunction& gamma, double t) {
  double s = 0.0;
  for (const auto& term : gamma) s += term.value(t);
  return s;
}

double rate_integral(const RateFunction& gamma, double t) {
  double s = 0.0;
  for (const auto& term : gamma) s += term.integral(t);
  return s;
}

QuantumChannel dephasing_at(double t, const RateFunction& gamma) {
  const double q = std::exp(-2.0 * rate_integral(gamma, t));
  if (!(q > 0.0) || q > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "dephasing_at: coherence factor " << q << " at t=" << t << " is outside (0, 1]";
    throw CptpViolationError(msg.str());
  }
  const double p = std::clamp((1.0 - q) / 2.0, 0.0, 1.0);
  std::vector<CMatrix> kraus{std::sqrt(1.0 - p) * CMatrix::identity(2)};
  if (p > 0.0) kraus.push_back(std::sqrt(p) * pauli::z());
  return QuantumChannel::from_kraus(std::move(kraus));
}

std::array<double, 3> pauli_eigenvalues(double t, const std::array<RateFunction, 3>& gammas) {
  const std::array<double, 3> g{rate_integral(gammas[0], t), rate_integral(gammas[1], t),
                                rate_integral(gammas[2], t)};
  return {std::exp(-2.0 * (g[1] + g[2])), std::exp(-2.0 * (g[0] + g[2])),
          std::exp(-2.0 * (g[0] + g[1]))};
}

QuantumChannel random_unitary_qubit_at(double t, const std::array<RateFunction, 3>& gammas) {
  const auto l = pauli_eigenvalues(t, gammas);
  std::array<double, 4> p{(1 + l[0] + l[1] + l[2]) / 4, (1 + l[0] - l[1] - l[2]) / 4,
                          (1 - l[0] + l[1] - l[2]) / 4, (1 - l[0] - l[1] + l[2]) / 4};
  for (auto& pk : p) {
    if (pk < -1e-12) {
      std::ostringstream msg;
      msg << "random_unitary_qubit_at: negative Pauli weight " << pk << " at t=" << t;
      throw CptpViolationError(msg.str());
    }
    pk = std::max(pk, 0.0);
  }
  return QuantumChannel::from_kraus(pauli_kraus(p));
}

std::array<RateFunction, 3> eternal_rates() {
  using K = RateTerm::Kind;
  return {RateFunction{{K::kConst, 1.0}}, RateFunction{{K::kConst, 1.0}},
          RateFunction{{K::kTanh, -1.0, 1.0}}};
}

QuantumChannel amplitude_damping(double g) {
  if (!(std::abs(g) <= 1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "amplitude_damping: |G| = " << std::abs(g) << " exceeds 1";
    throw CptpViolationError(msg.str());
  }
  const double g2 = std::min(g * g, 1.0);
  CMatrix k0{{1.0, 0.0}, {0.0, g}};
  CMatrix k1{{0.0, std::sqrt(1.0 - g2)}, {0.0, 0.0}};
  return QuantumChannel::from_kraus({std::move(k0), std::move(k1)});
}

double damped_cosine(double t, double g_decay, double g_freq) {
  return std::exp(-g_decay * t) * std::cos(g_freq * t);
}

QuantumChannel amplitude_damping_at(double t, double g_decay, double g_freq) {
  return amplitude_damping(damped_cosine(t, g_decay, g_freq));
}

QuantumChannel depolarizing_at(double t, double rate) {
  if (!(rate >= 0.0)) throw CptpViolationError("depolarizing_at: rate must be >= 0");
  const double p = 1.0 - std::exp(-rate * t);
  return QuantumChannel::from_kraus(pauli_kraus({1.0 - 0.75 * p, p / 4, p / 4, p / 4}));
}

DynamicsFamily DynamicsFamily::dephasing(double gamma_const) {
  auto f = dephasing(RateFunction{{RateTerm::Kind::kConst, gamma_const}});
  f.params = {{"gamma_const", gamma_const}};
  return f;
}

DynamicsFamily DynamicsFamily::dephasing(RateFunction gamma) {
  DynamicsFamily f;
  f.kind = DynamicsKind::kDephasing;
  f.rates[0] = std::move(gamma);
  return f;
}

DynamicsFamily DynamicsFamily::amplitude_damping(double g_decay, double g_freq) {
  DynamicsFamily f;
  f.kind = DynamicsKind::kAmplitudeDamping;
  f.params = {{"g_decay", g_decay}, {"g_freq", g_freq}};
  return f;
}

DynamicsFamily DynamicsFamily::eternal() {
  DynamicsFamily f;
  f.kind = DynamicsKind::kRandomUnitaryQubit;
  f.preset = "eternal";
  f.rates = eternal_rates();
  return f;
}

DynamicsFamily DynamicsFamily::depolarizing(double rate) {
  DynamicsFamily f;
  f.kind = DynamicsKind::kDepolarizing;
  f.params = {{"rate", rate}};
  return f;
}

DynamicsFamily DynamicsFamily::from_config(const std::string& kind,
                                           const std::map<std::string, double>& params,
                                           const std::string& preset) {
  if (kind == "dephasing") {
    reject_unknown(params, {"gamma_const"}, kind);
    return dephasing(require_param(params, "gamma_const", kind));
  }
  if (kind == "amplitude_damping") {
    reject_unknown(params, {"g_decay", "g_freq"}, kind);
    return amplitude_damping(require_param(params, "g_decay", kind),
                             require_param(params, "g_freq", kind));
  }
  if (kind == "random_unitary_qubit") {
    reject_unknown(params, {}, kind);
    if (preset != "eternal")
      throw ConfigError("random_unitary_qubit: unknown preset '" + preset +
                        "' (available: eternal)");
    return eternal();
  }
  if (kind == "depolarizing") {
    reject_unknown(params, {"rate"}, kind);
    const double rate = require_param(params, "rate", kind);
    if (rate < 0.0) throw ConfigError("depolarizing: rate must be >= 0");
    return depolarizing(rate);
  }
  throw ConfigError("unknown dynamics kind '" + kind + "'");
}

std::string DynamicsFamily::kind_name() const {
  switch (kind) {
    case DynamicsKind::kDephasing:
      return "dephasing";
    case DynamicsKind::kAmplitudeDamping:
      return "amplitude_damping";
    case DynamicsKind::kRandomUnitaryQubit:
      return "random_unitary_qubit";
    case DynamicsKind::kDepolarizing:
      return "depolarizing";
  }
  return "unknown";
}

QuantumChannel DynamicsFamily::at(double elapsed) const {
  switch (kind) {
    case DynamicsKind::kDephasing:
      return dephasing_at(elapsed, rates[0]);
    case DynamicsKind::kAmplitudeDamping:
      return amplitude_damping_at(elapsed, params.at("g_decay"), params.at("g_freq"));
    case DynamicsKind::kRandomUnitaryQubit:
      return random_unitary_qubit_at(elapsed, rates);
    case DynamicsKind::kDepolarizing:
      return depolarizing_at(elapsed, params.at("rate"));
  }
  throw Error("DynamicsFamily::at: unhandled kind");
}

std::vector<std::string> dynamics_kind_names() {
  return {"dephasing", "amplitude_damping", "random_unitary_qubit", "depolarizing"};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) throw DimensionError("linspace: need at least one point");
  std::vector<double> out(n, a);
  if (n == 1) return out;
  for (std::size_t k = 0; k < n; ++k)
    out[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  out.back() = b;
  return out;
}

Trajectory make_trajectory(const DynamicsFamily& family, double t0, std::vector<double> grid) {
  if (grid.empty()) throw DimensionError("make_trajectory: empty grid");
  if (std::abs(grid.front() - t0) > 1e-12)
    throw DimensionError("make_trajectory: grid must start at t0");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      throw DimensionError("make_trajectory: grid must be strictly increasing");

  std::vector<std::optional<QuantumChannel>> built(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { built[k] = family.at(grid[k] - t0); });

  Trajectory traj{family, t0, std::move(grid), {}};
  traj.channels.reserve(built.size());
  for (std::size_t k = 0; k < built.size(); ++k) {
    const double m = built[k]->min_choi_eigenvalue();
    if (m < -kPsdTol) {
      std::ostringstream msg;
      msg << "make_trajectory: map at t=" << traj.grid[k] << " is not CP (min Choi eigenvalue "
          << m << ")";
      throw CptpViolationError(msg.str());
    }
    traj.channels.push_back(std::move(*built[k]));
  }
  return traj;
}

IntermediateMap intermediate_map(const Trajectory& traj, double t_early, double t_late) {
  if (t_early > t_late) throw DimensionError("intermediate_map: t_early > t_late");
  return intermediate_map(traj.family.at(t_early - traj.t0), traj.family.at(t_late - traj.t0));
}

IntermediateMap intermediate_map_at(const Trajectory& traj, std::size_t k_early,
                                    std::size_t k_late) {
  if (k_early > k_late || k_late >= traj.channels.size())
    throw DimensionError("intermediate_map_at: invalid grid indices");
  return intermediate_map(traj.channels[k_early], traj.channels[k_late], k_early);
}

std::vector<DivisibilityStep> cp_divisibility_scan(const Trajectory& traj) {
  return cp_divisibility_scan(std::span<const double>(traj.grid),
                              std::span<const QuantumChannel>(traj.channels));
}

}  // namespace backflow
