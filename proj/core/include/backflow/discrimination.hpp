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

// Minimum-error discrimination: guessing probability of an ensemble with a
// primal POVM and a dual certificate K >= p_i rho_i bounding it from above.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "backflow/numkernel.hpp"
#include "backflow/quantum.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

struct DiscriminationResult {
  /// sum_i p_i Tr(rho_i P_i) for the returned (exactly feasible) POVM.
  double pg_primal = 0.0;
  Povm povm;
  /// K with K - p_i rho_i PSD for every i.
  CMatrix dual_K;
  /// Tr K, an upper bound on the optimum.
  double pg_dual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  /// gap <= gap_tol; when false the best pair found is still returned.
  bool converged = false;
  /// "trivial", "helstrom", "fixed_point" or "interior_point".
  std::string method;
};

struct PgOptions {
  double gap_tol = kDefaultGapTol;
  /// Fixed-point iterations tried before escalating to the interior point.
  int fixed_point_iterations = 60;
  int max_iter = 150;
  /// Stopping tolerance handed to the interior-point solver.
  double ipm_tol = 1e-11;
};

/// Two-state closed form 1/2 (1 + |p1 rho1 - p2 rho2|_1); POVM from the
/// nonnegative / negative eigenspaces of the difference.
DiscriminationResult helstrom(const Ensemble& ensemble);

struct PgmResult {
  double pg_lower = 0.0;
  Povm povm;
};

/// Pretty-good measurement S^-1/2 p_i rho_i S^-1/2, with the complement of
/// supp S added to the most likely outcome.
PgmResult pgm(const Ensemble& ensemble);

/// Certified optimum. n == 2 delegates to helstrom. Throws DimensionError
/// when n * d > 512.
DiscriminationResult pg_opt(const Ensemble& ensemble, const PgOptions& options = {});

/// Same as pg_opt on unnormalized weighted states A_i = p_i rho_i.
DiscriminationResult pg_opt_weighted(std::span<const CMatrix> weighted,
                                     const PgOptions& options = {});
DiscriminationResult helstrom_weighted(const CMatrix& a1, const CMatrix& a2);

/// sum_i Re Tr(A_i P_i).
double success_probability(std::span<const CMatrix> weighted, std::span<const CMatrix> effects);
double success_probability(const Ensemble& ensemble, const Povm& povm);

/// max_i max(0, lambda_max(A_i - K)).
double dual_defect(std::span<const CMatrix> weighted, const CMatrix& k);
/// Shifts a Hermitian candidate by a multiple of I so that it becomes the
/// tightest feasible certificate of that form.
CMatrix lift_dual(std::span<const CMatrix> weighted, const CMatrix& k);

/// Turns approximate effects into an exact POVM: clips negative eigenvalues,
/// then applies S^-1/2 (.) S^-1/2 with S the sum; any null space of S goes
/// to effect 0.
std::vector<CMatrix> repair_povm(std::vector<CMatrix> effects);

}  // namespace backflow
