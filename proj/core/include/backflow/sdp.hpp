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

// Small dense primal-dual interior-point solver for complex Hermitian
// semidefinite programs in standard form
//
//   minimize    sum_b Re Tr(C_b X_b)
//   subject to  sum_b Re Tr(A_kb X_b) = rhs_k,   X_b >= 0,
//
//   maximize    sum_k rhs_k y_k
//   subject to  Z_b = C_b - sum_k y_k A_kb >= 0.
//
// Search direction is HKM with a Mehrotra predictor-corrector; constraint
// matrices are stored as sparse (block, row, col, value) triplets so the
// Schur complement is cheap for the unit-like bases used by POVM problems.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "backflow/numkernel.hpp"

namespace backflow::sdp {

struct Entry {
  std::uint32_t block = 0;
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  cplx value;
};

/// A Hermitian constraint matrix, both triangles listed explicitly.
struct Constraint {
  std::vector<Entry> entries;
  double rhs = 0.0;
};

struct Problem {
  std::vector<CMatrix> cost;  ///< C_b, one per block (Hermitian)
  std::vector<Constraint> constraints;
};

struct Options {
  double tol = 1e-10;
  int max_iter = 120;
  double step_fraction = 0.95;
};

struct Solution {
  std::vector<CMatrix> x;
  std::vector<CMatrix> z;
  std::vector<double> y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  bool converged = false;
};

Solution solve(const Problem& problem, const Options& options = {});

/// Re Tr(A X) for a sparse constraint and block variables.
double apply_constraint(const Constraint& c, const std::vector<CMatrix>& x);

/// Appends the d^2 constraints sum_b X_b = I (Hermitian basis
/// E_jj, (e_jk + e_kj)/sqrt2, i(e_jk - e_kj)/sqrt2) over the given blocks.
/// Returns the index of the first appended constraint.
std::size_t add_identity_sum(Problem& problem, std::size_t dim,
                             const std::vector<std::uint32_t>& blocks);

/// The Hermitian basis element matching constraint offset k of
/// add_identity_sum, as a dense matrix.
CMatrix hermitian_basis_element(std::size_t dim, std::size_t k);

/// Appends Re Tr(rho X_block) = rhs. Returns the constraint index.
std::size_t add_trace_constraint(Problem& problem, const CMatrix& rho, std::uint32_t block,
                                 double rhs);

}  // namespace backflow::sdp
