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

// Measurement-induced correlation measures restricted to POVMs with fixed
// outcome statistics ("P-POVMs"): for a target distribution p and a bipartite
// state, C_A = max over P-POVMs on A of P_g(output ensemble on B) - max p.
//
// The outer maximization is bilinear and handled by a seesaw between two
// certified linear SDPs; the reported value is always an achievable lower
// bound.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "backflow/discrimination.hpp"
#include "backflow/numkernel.hpp"
#include "backflow/quantum.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

struct PPovmConstraint {
  ProbabilityDistribution target_dist;
  DensityMatrix marginal;
  double tol = 1e-8;
};

struct PPovmCheck {
  bool ok = false;
  /// max_i |Tr(marginal P_i) - p_i|.
  double max_defect = 0.0;
};

/// Outcome statistics check; throws DimensionError on dimension or outcome
/// count mismatch.
PPovmCheck is_ppovm(const Povm& povm, const PPovmConstraint& constraint);

/// Makes nearly-feasible effects exactly feasible: POVM repair, then an
/// identity shift fixing Tr(rho P_i) = p_i, then mixing with {p_i I} until
/// every effect is PSD. Both constraints then hold to rounding.
std::vector<CMatrix> repair_ppovm(std::vector<CMatrix> effects, const CMatrix& marginal,
                                  std::span<const double> probs);

struct AStepResult {
  Povm a_povm;
  /// sum_i Tr(P_i T_i), T_i = Tr_B[rho (I (x) Q_i)].
  double objective = 0.0;
  /// Certificate: Y + mu_i rho_A >= T_i.
  CMatrix dual_Y;
  std::vector<double> dual_mu;
  /// Tr Y + sum_i mu_i p_i.
  double dual_objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// T_i = Tr_B[rho_AB (I (x) Q_i)].
std::vector<CMatrix> a_side_gains(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                  std::span<const CMatrix> b_effects);

/// Linear SDP in {P_i} over the P-POVM set with gains T_i.
AStepResult opt_linear_ppovm(std::span<const CMatrix> gains, const PPovmConstraint& constraint,
                             double gap_tol = kDefaultGapTol);

/// One seesaw half-step: best P-POVM on A for a fixed measurement on B.
AStepResult opt_a_step(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                       const Povm& b_povm, const PPovmConstraint& constraint,
                       double gap_tol = kDefaultGapTol);

/// P-POVM with maximal overlap sum_i Tr(G_i P_i) with the given effects,
/// repaired to exact feasibility.
Povm project_to_ppovm(const Povm& povm, const PPovmConstraint& constraint);

/// random_povm projected onto the constraint set.
Povm random_ppovm(const PPovmConstraint& constraint, Rng& rng);

struct CorrelationOptions {
  std::size_t n_restarts = 4;
  double gap_tol = kDefaultGapTol;
  std::uint64_t seed = 0;
  int max_rounds = 200;
  double gain_tol = 1e-9;
  bool use_projective_init = true;
  bool use_pgm_init = true;
  /// Additional starting POVMs on A (projected when not already feasible).
  std::vector<Povm> extra_inits;
};

struct CorrelationResult {
  /// pg_inner - max p.
  double value = 0.0;
  Povm a_povm;
  Povm b_povm;
  /// Certified lower bound on P_g of the output ensemble of a_povm.
  double pg_inner = 0.0;
  std::size_t restarts_used = 0;
  /// (round, objective) of the winning run; non-decreasing.
  std::vector<std::pair<int, double>> seesaw_trace;
  /// "projective", "pgm", "random:<k>" or "extra:<k>".
  std::string best_init;
  /// P_g for the computational-basis measurement {|i><i|} when it is a
  /// P-POVM (before any seesaw step); NaN otherwise.
  double projective_pg = 0.0;
  /// Largest certified gap among the SDP solves of the winning run.
  double max_gap = 0.0;
  bool converged = true;
  /// 'A' or 'B' for c_ab_measure; the measured side otherwise.
  char side = 'A';
};

/// Output-ensemble guessing probability for a given measurement on A.
DiscriminationResult pg_for_a_povm(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                   const Povm& a_povm, double gap_tol = kDefaultGapTol);

CorrelationResult c_a_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                              const ProbabilityDistribution& dist,
                              const CorrelationOptions& options = {});
/// Same with the roles of A and B swapped (POVMs then act on B).
CorrelationResult c_b_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                              const ProbabilityDistribution& dist,
                              const CorrelationOptions& options = {});
CorrelationResult c_ab_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                               const ProbabilityDistribution& dist,
                               const CorrelationOptions& options = {});

/// Classical-quantum probe layout
///   sum_i p_i |i><i|_A (x) (lambda sigma (x) |i><i|_A'' +
///                           (1 - lambda) rho_i (x) |n><n|_A''),
/// with A of dimension n, sigma and rho_i on SA', and A'' of dimension n + 1
/// whose last level flags the second branch.
struct ProbeStructure {
  std::vector<double> probs;
  std::vector<CMatrix> states;
  CMatrix sigma;
  double lambda = 0.0;

  std::size_t n() const noexcept { return probs.size(); }
  std::size_t dim_sa() const noexcept { return sigma.rows(); }
  std::array<std::size_t, 2> dims() const noexcept { return {n(), dim_sa() * (n() + 1)}; }
};

CMatrix probe_state_matrix(const ProbeStructure& probe);

struct PovmDecomposition {
  /// e[i][k] = (P_k)_ii p_i / p_k.
  std::vector<std::vector<double>> e_coeffs;
  /// sum_i e_ik |i><i| on A''  (n-dimensional block).
  std::vector<DensityMatrix> perp_states;
  /// sum_i e_ik rho_i on SA'.
  std::vector<DensityMatrix> par_states;
};

PovmDecomposition povm_decomposition(const Povm& a_povm, const ProbeStructure& probe);

/// Output states lambda sigma (x) perp_k + (1 - lambda) par_k (x) |n><n|.
std::vector<CMatrix> reconstruct_outputs(const PovmDecomposition& dec,
                                         const ProbeStructure& probe);

struct SplitCheck {
  double pg_total = 0.0;
  double pg_perp = 0.0;
  double pg_par = 0.0;
  /// |pg_total - (lambda pg_perp + (1 - lambda) pg_par)|.
  double defect = 0.0;
};

SplitCheck pg_split_check(const Povm& a_povm, const ProbeStructure& probe,
                          double gap_tol = kDefaultGapTol);

}  // namespace backflow
