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

// Linear maps on operators held as Kraus list (when CP), Choi matrix and
// superoperator; composition; intermediate maps and CP-divisibility scans.
//
// Conventions:
//  * superoperators act on column-stacked operators, vec(rho)[i + j d] = rho_ij;
//  * the Choi matrix is unnormalized, sum_ij |i><j| (x) L(|i><j|), input factor
//    first, so trace preservation reads Tr_out(choi) = I_in.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "backflow/numkernel.hpp"
#include "backflow/quantum.hpp"
#include "backflow/rng.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

class QuantumChannel {
 public:
  /// Validates sum K^dagger K = I (1e-9); throws NonTracePreservingError.
  static QuantumChannel from_kraus(std::vector<CMatrix> kraus);
  /// Arbitrary Hermiticity-preserving linear map given by its superoperator.
  /// No CP or TP requirement; Kraus operators are derived when the Choi
  /// matrix is PSD within kPsdTol.
  static QuantumChannel from_superop(const CMatrix& superop, std::size_t dim_in,
                                     std::size_t dim_out);
  static QuantumChannel from_choi(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out);
  static QuantumChannel identity(std::size_t dim);

  std::size_t dim_in() const noexcept { return dim_in_; }
  std::size_t dim_out() const noexcept { return dim_out_; }
  const std::optional<std::vector<CMatrix>>& kraus() const noexcept { return kraus_; }
  const CMatrix& choi() const noexcept { return choi_; }
  const CMatrix& superop() const noexcept { return superop_; }

  /// max |Tr_out(choi) - I|.
  double tp_defect() const;
  double min_choi_eigenvalue() const;
  /// Choi PSD within kPsdTol.
  bool is_cp() const { return min_choi_eigenvalue() >= -kPsdTol; }

  /// L(x) for any operator x (uses Kraus when available).
  CMatrix apply(const CMatrix& x) const;
  /// Heisenberg picture L^*(e) = sum K^dagger e K; requires Kraus form.
  CMatrix apply_adjoint(const CMatrix& effect) const;

 private:
  QuantumChannel() = default;

  std::size_t dim_in_ = 0;
  std::size_t dim_out_ = 0;
  std::optional<std::vector<CMatrix>> kraus_;
  CMatrix choi_;
  CMatrix superop_;
};

CMatrix superop_from_kraus(std::span<const CMatrix> kraus);
CMatrix choi_from_superop(const CMatrix& superop, std::size_t dim_in, std::size_t dim_out);
CMatrix superop_from_choi(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out);
/// Kraus operators from a PSD Choi matrix (eigenvalues <= cutoff dropped).
std::vector<CMatrix> kraus_from_choi(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                                     double cutoff = 1e-14);

QuantumChannel channel_from_kraus(std::vector<CMatrix> kraus);

/// Applies a CPTP channel to a state; throws DimensionError on mismatch.
DensityMatrix apply_channel(const QuantumChannel& ch, const DensityMatrix& rho);

enum class Side {
  kLeft,   ///< I_anc (x) ch
  kRight,  ///< ch (x) I_anc
};

QuantumChannel tensor_with_identity(const QuantumChannel& ch, std::size_t anc_dim, Side side);

/// later o earlier.
QuantumChannel compose(const QuantumChannel& later, const QuantumChannel& earlier);

/// Random CPTP map from a Haar-like random isometry with n_kraus outputs;
/// needs n_kraus * dim_out >= dim_in.
QuantumChannel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t n_kraus,
                              Rng& rng);

struct IntermediateMap {
  QuantumChannel map;
  double min_choi_eig = 0.0;
  double tp_defect = 0.0;
  /// 2-norm condition number of the inverted superoperator.
  double inversion_condition = 1.0;
  /// Sampled positivity check on 200 random pure inputs (advisory only).
  bool positive_on_samples = true;
};

/// V = Lambda_late o Lambda_early^{-1}; throws NonInvertibleError when the
/// early superoperator has condition number >= kMaxCondition.
IntermediateMap intermediate_map(const QuantumChannel& early, const QuantumChannel& late,
                                 std::uint64_t sample_seed = 0);

enum class CpVerdict { kCp, kNonCp, kIndeterminate };

struct DivisibilityStep {
  double t_early = 0.0;
  double t_late = 0.0;
  double min_choi_eig = 0.0;
  double tp_defect = 0.0;
  double inversion_condition = 1.0;
  CpVerdict verdict = CpVerdict::kIndeterminate;
  bool positive_on_samples = true;

  /// cp_flag of the step; false for indeterminate steps.
  bool cp_flag() const noexcept { return verdict == CpVerdict::kCp; }
};

/// Per consecutive grid step verdicts; channels[k] is Lambda(grid[k], t0).
/// NonInvertible steps are recorded as indeterminate rather than thrown.
std::vector<DivisibilityStep> cp_divisibility_scan(std::span<const double> grid,
                                                   std::span<const QuantumChannel> channels);

}  // namespace backflow
