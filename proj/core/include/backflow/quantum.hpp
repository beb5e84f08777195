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

// States, ensembles, POVMs and the output ensemble produced by measuring one
// side of a bipartite state.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "backflow/numkernel.hpp"
#include "backflow/rng.hpp"

namespace backflow {

/// Unit-trace positive-semidefinite operator.
class DensityMatrix {
 public:
  /// Validates trace (1e-10) and minimum eigenvalue (-kPsdTol); the stored
  /// matrix is the Hermitian part of `m`.
  explicit DensityMatrix(const CMatrix& m);

  /// I/d.
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// |i><i|.
  static DensityMatrix basis_state(std::size_t dim, std::size_t i);
  /// |psi><psi| after normalizing psi.
  static DensityMatrix pure(std::span<const cplx> psi);

  std::size_t dim() const noexcept { return matrix_.rows(); }
  const CMatrix& matrix() const noexcept { return matrix_; }
  double purity() const;

 private:
  CMatrix matrix_;
};

/// Strictly positive weights summing to one (1e-12).
class ProbabilityDistribution {
 public:
  explicit ProbabilityDistribution(std::vector<double> weights);
  static ProbabilityDistribution uniform(std::size_t n);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  double max() const;

 private:
  std::vector<double> weights_;
};

/// Weighted collection of same-dimension states. Weights are non-negative and
/// sum to one; zero weights are allowed for flagged measurement outcomes.
class Ensemble {
 public:
  Ensemble(std::vector<double> probs, std::vector<DensityMatrix> states);
  Ensemble(const ProbabilityDistribution& probs, std::vector<DensityMatrix> states);

  std::size_t size() const noexcept { return probs_.size(); }
  std::size_t dim() const noexcept { return states_.front().dim(); }
  const std::vector<double>& probs() const noexcept { return probs_; }
  const std::vector<DensityMatrix>& states() const noexcept { return states_; }
  double max_prob() const;

  /// p_i rho_i.
  std::vector<CMatrix> weighted_states() const;

 private:
  std::vector<double> probs_;
  std::vector<DensityMatrix> states_;
};

/// Effects that are PSD (kPsdTol) and sum to the identity (1e-9 entrywise).
class Povm {
 public:
  /// Empty placeholder; size() == 0.
  Povm() = default;
  explicit Povm(std::vector<CMatrix> effects);

  /// Computational-basis projective measurement {|i><i|}.
  static Povm computational(std::size_t dim);
  /// Trivial measurement {I}.
  static Povm trivial(std::size_t dim);

  std::size_t size() const noexcept { return effects_.size(); }
  std::size_t dim() const noexcept { return effects_.front().rows(); }
  const std::vector<CMatrix>& effects() const noexcept { return effects_; }
  const CMatrix& operator[](std::size_t i) const { return effects_[i]; }

  /// Outcome probabilities Tr(rho P_i).
  std::vector<double> probabilities(const CMatrix& rho) const;

 private:
  std::vector<CMatrix> effects_;
};

/// Largest deviation of a candidate effect list from the POVM conditions:
/// max(-min eigenvalue, max |sum - I|).
double povm_defect(std::span<const CMatrix> effects);

struct OutputEnsemble {
  Ensemble ensemble;
  /// true where p_i < kNegligibleProbability; the state is then I/d_B.
  std::vector<bool> negligible;
};

/// Measures subsystem A of rho_AB with povm_a (acting on dims[0]) and returns
/// {p_i, rho_B,i}.
OutputEnsemble measure_ensemble(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                const Povm& povm_a);

/// Unnormalized conditional operators Tr_A[rho_AB (P_i (x) I_B)]; raw access
/// for solvers that must not renormalize.
std::vector<CMatrix> conditional_operators(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                           std::span<const CMatrix> effects_a);

/// Ginibre-induced random state of the given rank.
DensityMatrix random_state(std::size_t dim, std::size_t rank, Rng& rng);
DensityMatrix random_state(std::size_t dim, std::size_t rank, std::uint64_t seed);
/// Haar-random pure state vector.
std::vector<cplx> random_pure_vector(std::size_t dim, Rng& rng);
/// Haar-random unitary (QR of a Ginibre matrix with phase fix).
CMatrix random_unitary(std::size_t dim, Rng& rng);
/// {S^-1/2 G_i S^-1/2} with Ginibre-positive G_i and S = sum G_i.
Povm random_povm(std::size_t dim, std::size_t n_outcomes, Rng& rng);
Povm random_povm(std::size_t dim, std::size_t n_outcomes, std::uint64_t seed);
/// Flat-Dirichlet distribution with entries bounded below by `floor`.
ProbabilityDistribution random_distribution(std::size_t n, Rng& rng, double floor = 0.05);

namespace pauli {
CMatrix x();
CMatrix y();
CMatrix z();
}  // namespace pauli

}  // namespace backflow
