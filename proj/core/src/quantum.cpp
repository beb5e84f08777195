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

#include "backflow/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

DensityMatrix::DensityMatrix(const CMatrix& m) {
  if (!m.is_square() || m.rows() == 0)
    throw DimensionError("DensityMatrix: matrix must be square and non-empty");
  const double defect = hermiticity_defect(m);
  if (defect > 1e-9)
    throw NonHermitianError("DensityMatrix: Hermiticity defect " + std::to_string(defect));
  matrix_ = hermitian_part(m);
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw InvalidStateError("DensityMatrix: trace " + std::to_string(tr) + " differs from 1");
  const double lmin = min_eigenvalue(matrix_);
  if (lmin < -kPsdTol)
    throw InvalidStateError("DensityMatrix: minimum eigenvalue " + std::to_string(lmin) +
                            " below -PSD_TOL");
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  return DensityMatrix(CMatrix::identity(dim) * (1.0 / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t i) {
  if (i >= dim) throw DimensionError("basis_state: index out of range");
  return DensityMatrix(CMatrix::unit(dim, i, i));
}

DensityMatrix DensityMatrix::pure(std::span<const cplx> psi) {
  double norm2 = 0.0;
  for (const auto& z : psi) norm2 += std::norm(z);
  if (norm2 <= 0.0) throw InvalidStateError("pure: zero vector");
  CMatrix m = CMatrix::outer(psi);
  m *= 1.0 / norm2;
  return DensityMatrix(m);
}

double DensityMatrix::purity() const { return re_trace_product(matrix_, matrix_); }

ProbabilityDistribution::ProbabilityDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw InvalidStateError("ProbabilityDistribution: empty");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0))
      throw InvalidStateError("ProbabilityDistribution: weights must be strictly positive");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw InvalidStateError("ProbabilityDistribution: weights sum to " + std::to_string(sum));
}

ProbabilityDistribution ProbabilityDistribution::uniform(std::size_t n) {
  return ProbabilityDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double ProbabilityDistribution::max() const {
  return *std::max_element(weights_.begin(), weights_.end());
}

Ensemble::Ensemble(std::vector<double> probs, std::vector<DensityMatrix> states)
    : probs_(std::move(probs)), states_(std::move(states)) {
  if (probs_.empty() || probs_.size() != states_.size())
    throw DimensionError("Ensemble: probability and state counts differ or are zero");
  double sum = 0.0;
  for (double p : probs_) {
    if (p < 0.0 || !std::isfinite(p)) throw InvalidStateError("Ensemble: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw InvalidStateError("Ensemble: probabilities sum to " + std::to_string(sum));
  for (const auto& s : states_)
    if (s.dim() != states_.front().dim()) throw DimensionError("Ensemble: state dimensions differ");
}

Ensemble::Ensemble(const ProbabilityDistribution& probs, std::vector<DensityMatrix> states)
    : Ensemble(probs.weights(), std::move(states)) {}

double Ensemble::max_prob() const { return *std::max_element(probs_.begin(), probs_.end()); }

std::vector<CMatrix> Ensemble::weighted_states() const {
  std::vector<CMatrix> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(states_[i].matrix() * probs_[i]);
  return out;
}

double povm_defect(std::span<const CMatrix> effects) {
  if (effects.empty()) return 1.0;
  const std::size_t d = effects.front().rows();
  CMatrix sum(d, d);
  double defect = 0.0;
  for (const auto& e : effects) {
    if (e.rows() != d || !e.is_square()) throw DimensionError("povm_defect: effect shape mismatch");
    sum += e;
    defect = std::max(defect, -min_eigenvalue(e));
    defect = std::max(defect, hermiticity_defect(e));
  }
  return std::max(defect, max_abs_diff(sum, CMatrix::identity(d)));
}

Povm::Povm(std::vector<CMatrix> effects) : effects_(std::move(effects)) {
  if (effects_.empty()) throw InvalidPovmError("Povm: no effects");
  const std::size_t d = effects_.front().rows();
  CMatrix sum(d, d);
  for (auto& e : effects_) {
    if (!e.is_square() || e.rows() != d) throw DimensionError("Povm: effect shape mismatch");
    if (hermiticity_defect(e) > 1e-9) throw InvalidPovmError("Povm: effect is not Hermitian");
    e = hermitian_part(e);
    if (min_eigenvalue(e) < -kPsdTol) throw InvalidPovmError("Povm: effect is not PSD");
    sum += e;
  }
  if (max_abs_diff(sum, CMatrix::identity(d)) > 1e-9)
    throw InvalidPovmError("Povm: effects do not sum to identity");
}

Povm Povm::computational(std::size_t dim) {
  std::vector<CMatrix> effects;
  for (std::size_t i = 0; i < dim; ++i) effects.push_back(CMatrix::unit(dim, i, i));
  return Povm(std::move(effects));
}

Povm Povm::trivial(std::size_t dim) { return Povm({CMatrix::identity(dim)}); }

std::vector<double> Povm::probabilities(const CMatrix& rho) const {
  std::vector<double> p;
  p.reserve(size());
  for (const auto& e : effects_) p.push_back(re_trace_product(rho, e));
  return p;
}

std::vector<CMatrix> conditional_operators(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                           std::span<const CMatrix> effects_a) {
  const auto [da, db] = dims;
  if (!rho_ab.is_square() || rho_ab.rows() != da * db)
    throw DimensionError("conditional_operators: state dimension does not match dims");
  std::vector<CMatrix> out;
  out.reserve(effects_a.size());
  for (const auto& p : effects_a) {
    if (p.rows() != da || !p.is_square())
      throw DimensionError("conditional_operators: effect dimension does not match d_A");
    // Tr_A[rho (P (x) I)]_{b b'} = sum_{a a'} rho_{(a b),(a' b')} P_{a' a}
    CMatrix cond(db, db);
    for (std::size_t a = 0; a < da; ++a)
      for (std::size_t ap = 0; ap < da; ++ap) {
        const cplx w = p(ap, a);
        if (w == cplx{}) continue;
        for (std::size_t b = 0; b < db; ++b)
          for (std::size_t bp = 0; bp < db; ++bp) cond(b, bp) += w * rho_ab(a * db + b, ap * db + bp);
      }
    out.push_back(hermitian_part(cond));
  }
  return out;
}

OutputEnsemble measure_ensemble(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                const Povm& povm_a) {
  if (povm_a.dim() != dims[0])
    throw DimensionError("measure_ensemble: POVM acts on dimension " +
                         std::to_string(povm_a.dim()) + " but d_A is " + std::to_string(dims[0]));
  const auto cond = conditional_operators(rho_ab.matrix(), dims, povm_a.effects());
  std::vector<double> probs;
  std::vector<DensityMatrix> states;
  std::vector<bool> negligible;
  double total = 0.0;
  for (const auto& c : cond) total += std::max(0.0, c.trace().real());
  for (const auto& c : cond) {
    const double p = std::max(0.0, c.trace().real());
    if (p < kNegligibleProbability) {
      probs.push_back(0.0);
      states.push_back(DensityMatrix::maximally_mixed(dims[1]));
      negligible.push_back(true);
    } else {
      probs.push_back(p / total);
      states.emplace_back(c * (1.0 / p));
      negligible.push_back(false);
    }
  }
  return {Ensemble(std::move(probs), std::move(states)), std::move(negligible)};
}

DensityMatrix random_state(std::size_t dim, std::size_t rank, Rng& rng) {
  if (rank < 1 || rank > dim) throw InvalidStateError("random_state: rank must be in [1, dim]");
  CMatrix g(dim, rank);
  for (auto& z : g.entries()) z = rng.complex_normal();
  CMatrix rho = g * g.adjoint();
  rho *= 1.0 / rho.trace().real();
  return DensityMatrix(rho);
}

DensityMatrix random_state(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(dim, rank, rng);
}

std::vector<cplx> random_pure_vector(std::size_t dim, Rng& rng) {
  std::vector<cplx> v(dim);
  double n2 = 0.0;
  for (auto& z : v) {
    z = rng.complex_normal();
    n2 += std::norm(z);
  }
  for (auto& z : v) z /= std::sqrt(n2);
  return v;
}

CMatrix random_unitary(std::size_t dim, Rng& rng) {
  CMatrix g(dim, dim);
  for (auto& z : g.entries()) z = rng.complex_normal();
  // Modified Gram-Schmidt on columns; the implied R has positive diagonal.
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      cplx proj{};
      for (std::size_t i = 0; i < dim; ++i) proj += std::conj(g(i, k)) * g(i, j);
      for (std::size_t i = 0; i < dim; ++i) g(i, j) -= proj * g(i, k);
    }
    double n2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) n2 += std::norm(g(i, j));
    const double inv = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i < dim; ++i) g(i, j) *= inv;
  }
  return g;
}

Povm random_povm(std::size_t dim, std::size_t n_outcomes, Rng& rng) {
  if (n_outcomes < 1) throw InvalidPovmError("random_povm: need at least one outcome");
  if (n_outcomes == 1) return Povm::trivial(dim);
  std::vector<CMatrix> g;
  CMatrix sum(dim, dim);
  for (std::size_t i = 0; i < n_outcomes; ++i) {
    CMatrix x(dim, dim);
    for (auto& z : x.entries()) z = rng.complex_normal();
    g.push_back(hermitian_part(x * x.adjoint()));
    sum += g.back();
  }
  const CMatrix s = psd_inv_sqrt(sum);
  std::vector<CMatrix> effects;
  for (const auto& gi : g) effects.push_back(hermitian_part(s * gi * s));
  // Exact completion: push the residual of the sum into the last effect.
  CMatrix residual = CMatrix::identity(dim);
  for (std::size_t i = 0; i + 1 < effects.size(); ++i) residual -= effects[i];
  effects.back() = hermitian_part(residual);
  return Povm(std::move(effects));
}

Povm random_povm(std::size_t dim, std::size_t n_outcomes, std::uint64_t seed) {
  Rng rng(seed);
  return random_povm(dim, n_outcomes, rng);
}

ProbabilityDistribution random_distribution(std::size_t n, Rng& rng, double floor) {
  if (floor * static_cast<double>(n) >= 1.0)
    throw InvalidStateError("random_distribution: floor too large");
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    x = -std::log(u);
    sum += x;
  }
  const double scale = 1.0 - floor * static_cast<double>(n);
  double total = 0.0;
  for (auto& x : w) {
    x = floor + scale * x / sum;
    total += x;
  }
  for (auto& x : w) x /= total;
  return ProbabilityDistribution(std::move(w));
}

namespace pauli {
CMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
CMatrix y() { return {{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}}; }
CMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

}  // namespace backflow
