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

// Flagged classical-quantum probe states, their evolution under
// I_A (x) Lambda_S (x) I_A'A'', and the time-grid correlation backflow scan.
//
// Layout: A (dimension n) holds the classical label; B = S (x) A' (x) A''
// with A'' of dimension n + 1. The probe at mixing weight lambda is
//   sum_i p_i |i><i|_A (x) (lambda sigma (x) |i><i|_A'' +
//                           (1 - lambda) rho_i (x) |n><n|_A'').

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backflow/correlations.hpp"
#include "backflow/dynamics.hpp"
#include "backflow/quantum.hpp"

namespace backflow {

struct ProbeSpec {
  /// {p_i, rho_i} on S (x) A'; every p_i > 0.
  Ensemble base_ensemble;
  DensityMatrix sigma;
  double lambda = 0.0;
  std::size_t dim_s = 2;
  std::size_t dim_ancilla = 1;

  std::size_t n_bar() const noexcept { return base_ensemble.size(); }
  std::size_t dim_sa() const noexcept { return dim_s * dim_ancilla; }
  std::array<std::size_t, 2> dims() const noexcept {
    return {n_bar(), dim_sa() * (n_bar() + 1)};
  }
  /// Throws DimensionError / InvalidStateError when the layout is
  /// inconsistent (lambda outside [0, 1), dim A' > d_S, zero weights).
  void validate() const;
};

/// sigma defaults to the maximally mixed state on S (x) A'.
ProbeSpec make_probe_spec(Ensemble base, std::size_t dim_s, std::size_t dim_ancilla,
                          double lambda, std::optional<DensityMatrix> sigma = std::nullopt);

/// Named base ensembles on S (x) A':
///   "basis"   - the first n computational basis states, uniform weights;
///   "skewed3" - |0>, |+>, |1> on a qubit S (A' trivial), weights .2/.3/.5;
///               at small lambda its best P-POVM is not the projective one.
Ensemble preset_ensemble(const std::string& name, std::size_t dim_s, std::size_t dim_ancilla,
                         std::size_t n_bar);
std::vector<std::string> preset_ensemble_names();

DensityMatrix build_probe(const ProbeSpec& spec);

/// Probe layout with states and sigma pushed through channel (x) I_A'.
ProbeStructure evolved_structure(const ProbeSpec& spec, const QuantumChannel& channel);

/// Index of t on the trajectory grid (within 1e-12); throws DimensionError.
std::size_t grid_index(const Trajectory& traj, double t);

/// Applies I_A (x) Lambda(t, t0) (x) I_A'A'' to the full probe state.
DensityMatrix evolve_probe(const ProbeSpec& spec, const Trajectory& traj, double t);

/// {p_i, (Lambda(t, t0) (x) I_A') rho_i}.
Ensemble evolve_ensemble(const Ensemble& ensemble, std::size_t dim_ancilla,
                         const Trajectory& traj, double t);

struct ScanOptions {
  CorrelationOptions correlation;
  /// Steps with Delta C above this count as backflow.
  double significance = kCorrelationTol;
  /// Re-run each grid point seeded with the best POVM of its successor. The
  /// P-POVM set does not depend on t, so this keeps lower-bound noise from
  /// faking backflow on CP steps.
  bool cross_inject = true;
};

struct ScanPoint {
  double time = 0.0;
  double c_value = 0.0;
  /// Correlation value attained by {|i><i|_A} (no seesaw).
  double c_projective = 0.0;
  /// P_g of the evolved base ensemble.
  double pg_ensemble = 0.0;
  /// Split of the best POVM into the sigma block and the flagged block.
  double pg_perp = 0.0;
  double pg_par = 0.0;
  double split_defect = 0.0;
  double gap = 0.0;
  std::size_t restarts_used = 0;
  bool converged = true;
  std::string best_init;
  Povm a_povm;
};

struct ScanStep {
  double t_early = 0.0;
  double t_late = 0.0;
  double min_choi_eig = 0.0;
  double tp_defect = 0.0;
  double inversion_condition = 1.0;
  CpVerdict verdict = CpVerdict::kIndeterminate;
  double delta_c = 0.0;
  double delta_pg_ensemble = 0.0;
  bool backflow = false;
  /// Backflow never occurs on a CP step.
  bool consistent = true;
  /// backflow == (verdict is non-CP).
  bool matches_cp = true;

  bool cp_flag() const noexcept { return verdict == CpVerdict::kCp; }
};

struct BackflowInterval {
  double t_early = 0.0;
  double t_late = 0.0;
  double delta_c = 0.0;
};

struct WitnessReport {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<ScanPoint> points;
  std::vector<ScanStep> steps;
  std::vector<BackflowInterval> backflow_intervals;
  bool converged = true;
};

/// Correlation scan of the probe at spec.lambda along the trajectory grid.
WitnessReport scan_backflow(const ProbeSpec& spec, const Trajectory& traj,
                            const ScanOptions& options = {});

struct LambdaSweep {
  std::vector<WitnessReport> reports;
  /// Per step: smallest swept lambda from which every larger swept lambda
  /// shows backflow; NaN when there is none.
  std::vector<double> lambda_bar;
};

std::vector<double> default_lambdas();

LambdaSweep sweep_lambda(const ProbeSpec& spec, const Trajectory& traj,
                         const std::vector<double>& lambdas, const ScanOptions& options = {});

struct EnsembleSearchResult {
  Ensemble ensemble;
  double delta_pg = 0.0;
  double pg_early = 0.0;
  double pg_late = 0.0;
  std::size_t evaluations = 0;
};

/// Heuristic search for an n-state ensemble on S (x) A' maximizing
/// P_g(E(t_late)) - P_g(E(t_early)). Candidates: computational-basis
/// ensembles, n_trials random ensembles, then coordinate refinement of the
/// best. The result may be <= 0.
EnsembleSearchResult search_ensemble(const Trajectory& traj, std::size_t k_early,
                                     std::size_t k_late, std::size_t n_bar,
                                     std::size_t dim_ancilla, std::size_t n_trials,
                                     std::uint64_t seed);

}  // namespace backflow
