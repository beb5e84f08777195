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

#include <gtest/gtest.h>

#include <cmath>

#include "backflow/errors.hpp"
#include "backflow/quantum.hpp"
#include "oracles.hpp"

namespace backflow {
namespace {

TEST(DensityMatrix, ValidatesTraceAndPositivity) {
  EXPECT_NO_THROW(DensityMatrix(CMatrix{{0.5, 0.0}, {0.0, 0.5}}));
  EXPECT_THROW(DensityMatrix(CMatrix{{0.6, 0.0}, {0.0, 0.5}}), InvalidStateError);
  EXPECT_THROW(DensityMatrix(CMatrix{{1.5, 0.0}, {0.0, -0.5}}), InvalidStateError);
  EXPECT_THROW(DensityMatrix(CMatrix{{0.5, 1.0}, {0.0, 0.5}}), NonHermitianError);
  EXPECT_THROW(DensityMatrix(CMatrix(2, 3)), DimensionError);
}

TEST(DensityMatrix, Factories) {
  EXPECT_NEAR(DensityMatrix::maximally_mixed(4).purity(), 0.25, 1e-15);
  EXPECT_NEAR(DensityMatrix::basis_state(3, 2).matrix()(2, 2).real(), 1.0, 0.0);
  const std::vector<cplx> psi = {1.0, cplx(0, 1)};
  const auto p = DensityMatrix::pure(psi);
  EXPECT_NEAR(p.purity(), 1.0, 1e-15);
  EXPECT_NEAR(p.matrix()(0, 1).imag(), -0.5, 1e-15);
}

TEST(Distribution, RejectsBadWeights) {
  EXPECT_THROW(ProbabilityDistribution({0.5, 0.6}), InvalidStateError);
  EXPECT_THROW(ProbabilityDistribution({1.0, 0.0}), InvalidStateError);
  EXPECT_NEAR(ProbabilityDistribution::uniform(4).max(), 0.25, 0.0);
}

TEST(Ensemble, AllowsZeroWeightsButChecksShape) {
  std::vector<DensityMatrix> s = {DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)};
  EXPECT_NO_THROW(Ensemble({1.0, 0.0}, s));
  EXPECT_THROW(Ensemble({0.5, 0.5, 0.0}, s), DimensionError);
  EXPECT_THROW(Ensemble({1.5, -0.5}, s), InvalidStateError);
  std::vector<DensityMatrix> mixed = {DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(3, 1)};
  EXPECT_THROW(Ensemble({0.5, 0.5}, mixed), DimensionError);
}

TEST(Povm, ValidationAndProbabilities) {
  EXPECT_NO_THROW(Povm::computational(3));
  EXPECT_THROW(Povm({CMatrix{{1.0, 0.0}, {0.0, 0.5}}}), InvalidPovmError);
  EXPECT_THROW(Povm({CMatrix{{1.5, 0.0}, {0.0, 1.0}}, CMatrix{{-0.5, 0.0}, {0.0, 0.0}}}),
               InvalidPovmError);
  const auto probs = Povm::computational(2).probabilities(CMatrix{{0.3, 0.1}, {0.1, 0.7}});
  EXPECT_NEAR(probs[0], 0.3, 1e-15);
  EXPECT_NEAR(probs[1], 0.7, 1e-15);
}

TEST(Random, StatesAndPovmsAreValid) {
  Rng rng(21);
  for (std::size_t d : {2u, 3u, 6u}) {
    for (std::size_t rank = 1; rank <= d; ++rank) {
      const auto rho = random_state(d, rank, rng);
      EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
      const auto ev = oracle::eigenvalues(rho.matrix());
      EXPECT_GE(ev.front(), -1e-12);
      std::size_t nonzero = 0;
      for (double e : ev) nonzero += e > 1e-10;
      EXPECT_EQ(nonzero, rank);
    }
    const auto povm = random_povm(d, 4, rng);
    EXPECT_LE(povm_defect(povm.effects()), 1e-10);
    const auto u = random_unitary(d, rng);
    EXPECT_LE(max_abs_diff(u * u.adjoint(), CMatrix::identity(d)), 1e-12);
  }
  const auto dist = random_distribution(5, rng, 0.05);
  for (double p : dist.weights()) EXPECT_GE(p, 0.05 - 1e-15);
}

TEST(MeasureEnsemble, AveragesBackToMarginal) {
  Rng rng(22);
  const std::size_t da = 3, db = 2;
  const auto rho = random_state(da * db, 4, rng);
  const auto povm = random_povm(da, 3, rng);
  const auto out = measure_ensemble(rho, {da, db}, povm);
  CMatrix avg(db, db);
  double total = 0;
  for (std::size_t i = 0; i < out.ensemble.size(); ++i) {
    avg += out.ensemble.states()[i].matrix() * out.ensemble.probs()[i];
    total += out.ensemble.probs()[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_LE(max_abs_diff(avg, oracle::trace_a(rho.matrix(), da, db)), 1e-12);
  // p_i = Tr(rho_A P_i).
  const auto rho_a = oracle::trace_b(rho.matrix(), da, db);
  for (std::size_t i = 0; i < povm.size(); ++i)
    EXPECT_NEAR(out.ensemble.probs()[i], (rho_a * povm[i]).trace().real(), 1e-12);
}

TEST(MeasureEnsemble, FlagsNegligibleOutcomes) {
  // rho = |0><0| (x) |+><+|, measured with {|0><0|, |1><1|}: outcome 1 never occurs.
  const std::vector<cplx> plus = {M_SQRT1_2, M_SQRT1_2};
  const auto rho = DensityMatrix(kron(DensityMatrix::basis_state(2, 0).matrix(),
                                      DensityMatrix::pure(plus).matrix()));
  const auto out = measure_ensemble(rho, {2, 2}, Povm::computational(2));
  EXPECT_FALSE(out.negligible[0]);
  EXPECT_TRUE(out.negligible[1]);
  EXPECT_LE(max_abs_diff(out.ensemble.states()[1].matrix(), DensityMatrix::maximally_mixed(2).matrix()),
            1e-15);
}

TEST(MeasureEnsemble, ConditionalOperatorsSumToReducedState) {
  Rng rng(23);
  const auto rho = random_state(6, 6, rng);
  const auto povm = random_povm(2, 5, rng);
  const auto cond = conditional_operators(rho.matrix(), {2, 3}, povm.effects());
  CMatrix sum(3, 3);
  for (const auto& c : cond) sum += c;
  EXPECT_LE(max_abs_diff(sum, oracle::trace_a(rho.matrix(), 2, 3)), 1e-12);
}

}  // namespace
}  // namespace backflow
