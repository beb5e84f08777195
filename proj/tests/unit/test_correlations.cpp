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

#include "backflow/correlations.hpp"
#include "backflow/errors.hpp"
#include "oracles.hpp"

namespace backflow {
namespace {

DensityMatrix bell_state() {
  CMatrix m(4, 4);
  for (std::size_t a : {0u, 3u})
    for (std::size_t b : {0u, 3u}) m(a, b) = 0.5;
  return DensityMatrix(m);
}

TEST(PPovm, ConstraintCheck) {
  const PPovmConstraint c{ProbabilityDistribution({0.3, 0.7}), DensityMatrix(CMatrix{{0.3, 0.0}, {0.0, 0.7}})};
  EXPECT_TRUE(is_ppovm(Povm::computational(2), c).ok);
  const PPovmConstraint swapped{ProbabilityDistribution({0.7, 0.3}), c.marginal};
  const auto chk = is_ppovm(Povm::computational(2), swapped);
  EXPECT_FALSE(chk.ok);
  EXPECT_NEAR(chk.max_defect, 0.4, 1e-15);
  EXPECT_THROW(is_ppovm(Povm::computational(3), c), DimensionError);
}

TEST(PPovm, RepairHitsTargetsExactly) {
  Rng rng(51);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + t % 3, n = 2 + t % 3;
    const auto rho = random_state(d, d, rng);
    const auto dist = random_distribution(n, rng);
    const auto fixed = repair_ppovm(random_povm(d, n, rng).effects(), rho.matrix(), dist.weights());
    EXPECT_LE(povm_defect(fixed), 1e-10);
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_NEAR((rho.matrix() * fixed[i]).trace().real(), dist[i], 1e-12);
    const PPovmConstraint c{dist, rho};
    const auto proj = project_to_ppovm(random_povm(d, n, rng), c);
    EXPECT_TRUE(is_ppovm(proj, c).ok);
    EXPECT_TRUE(is_ppovm(random_ppovm(c, rng), c).ok);
  }
}

TEST(PPovm, LinearStepCertificate) {
  Rng rng(52);
  for (int t = 0; t < 20; ++t) {
    const std::size_t da = 2 + t % 2, db = 2 + (t / 2) % 2, n = 2 + t % 3;
    const auto rho = random_state(da * db, 1 + rng.below(da * db), rng);
    const auto rho_a = DensityMatrix(oracle::trace_b(rho.matrix(), da, db));
    const PPovmConstraint c{random_distribution(n, rng), rho_a};
    const auto b = random_povm(db, n, rng);
    const auto r = opt_a_step(rho, {da, db}, b, c);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.gap, 1e-7);
    EXPECT_TRUE(is_ppovm(r.a_povm, c).ok);
    const auto gains = a_side_gains(rho.matrix(), {da, db}, b.effects());
    // Dual feasibility: Y + mu_i rho_A - T_i >= 0.
    for (std::size_t i = 0; i < n; ++i)
      EXPECT_GE(oracle::min_eig(r.dual_Y + rho_a.matrix() * r.dual_mu[i] - gains[i]), -1e-8);
    double obj = 0;
    for (std::size_t i = 0; i < n; ++i) obj += (gains[i] * r.a_povm[i]).trace().real();
    EXPECT_NEAR(obj, r.objective, 1e-12);
  }
}

TEST(Correlation, VanishesOnProductStates) {
  Rng rng(53);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_state(2 + t % 2, 2, rng);
    const auto b = random_state(2, 2, rng);
    const DensityMatrix rho(kron(a.matrix(), b.matrix()));
    const auto r = c_a_measure(rho, {a.dim(), 2}, random_distribution(2, rng), {.seed = 5});
    EXPECT_LE(std::abs(r.value), 3e-7);
  }
}

TEST(Correlation, ClassicalClassicalState) {
  // sum_i p_i |ii><ii| with p = marginal: C = 1 - max p.
  const std::vector<double> p = {0.2, 0.3, 0.5};
  CMatrix m(9, 9);
  for (std::size_t i = 0; i < 3; ++i) m(i * 3 + i, i * 3 + i) = p[i];
  const auto r = c_a_measure(DensityMatrix(m), {3, 3}, ProbabilityDistribution(p));
  EXPECT_NEAR(r.value, 0.5, 1e-7);
  EXPECT_NEAR(r.projective_pg, 1.0, 1e-9);
}

TEST(Correlation, BellStateBothSides) {
  const auto dist = ProbabilityDistribution::uniform(2);
  const auto a = c_a_measure(bell_state(), {2, 2}, dist);
  const auto b = c_b_measure(bell_state(), {2, 2}, dist);
  EXPECT_NEAR(a.value, 0.5, 1e-7);
  EXPECT_NEAR(b.value, 0.5, 1e-7);
  const auto ab = c_ab_measure(bell_state(), {2, 2}, dist);
  EXPECT_NEAR(ab.value, 0.5, 1e-7);
  EXPECT_EQ(ab.side, 'A');
}

TEST(Correlation, SwapSymmetry) {
  Rng rng(54);
  const auto rho = random_state(6, 2, rng);
  const std::size_t dims[] = {2, 3};
  const std::size_t perm[] = {1, 0};
  const DensityMatrix swapped(permute_subsystems(rho.matrix(), dims, perm));
  const auto dist = random_distribution(2, rng);
  CorrelationOptions opts;
  opts.seed = 9;
  const auto b = c_b_measure(rho, {2, 3}, dist, opts);
  const auto a = c_a_measure(swapped, {3, 2}, dist, opts);
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_EQ(b.side, 'B');
}

TEST(Correlation, SeesawTraceIsMonotoneAndValueAchievable) {
  Rng rng(55);
  const auto rho = random_state(9, 3, rng);
  const auto dist = random_distribution(3, rng);
  CorrelationOptions opts;
  opts.seed = 3;
  opts.n_restarts = 2;
  const auto r = c_a_measure(rho, {3, 3}, dist, opts);
  for (std::size_t k = 1; k < r.seesaw_trace.size(); ++k)
    EXPECT_GE(r.seesaw_trace[k].second, r.seesaw_trace[k - 1].second - 1e-12);
  // Re-evaluating the reported A-POVM reproduces the value.
  const auto rho_a = DensityMatrix(oracle::trace_b(rho.matrix(), 3, 3));
  EXPECT_TRUE(is_ppovm(r.a_povm, {dist, rho_a}).ok);
  const auto pg = pg_for_a_povm(rho.matrix(), {3, 3}, r.a_povm);
  EXPECT_NEAR(pg.pg_primal - dist.max(), r.value, 2e-7);
  EXPECT_GE(r.value, -3e-7);
  // Same seed, same answer.
  const auto again = c_a_measure(rho, {3, 3}, dist, opts);
  EXPECT_EQ(again.value, r.value);
  EXPECT_EQ(again.best_init, r.best_init);
}

ProbeStructure small_probe(double lambda, Rng& rng) {
  ProbeStructure p;
  p.probs = {0.25, 0.35, 0.4};
  for (int i = 0; i < 3; ++i) p.states.push_back(random_state(2, 1 + i % 2, rng).matrix());
  p.sigma = random_state(2, 2, rng).matrix();
  p.lambda = lambda;
  return p;
}

TEST(Probe, DecompositionReconstructsOutputs) {
  Rng rng(56);
  for (int t = 0; t < 10; ++t) {
    const auto probe = small_probe(0.1 * t, rng);
    const auto rho = probe_state_matrix(probe);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    const std::vector<double> diag = probe.probs;
    const PPovmConstraint c{ProbabilityDistribution(probe.probs),
                            DensityMatrix(CMatrix::diagonal(std::span<const double>(diag)))};
    const auto povm = random_ppovm(c, rng);
    const auto dec = povm_decomposition(povm, probe);
    for (std::size_t k = 0; k < 3; ++k) {
      double col = 0;
      for (std::size_t i = 0; i < 3; ++i) col += dec.e_coeffs[i][k];
      EXPECT_NEAR(col, 1.0, 1e-12);
    }
    const auto outs = reconstruct_outputs(dec, probe);
    const auto direct = measure_ensemble(DensityMatrix(rho), probe.dims(), povm);
    for (std::size_t k = 0; k < 3; ++k)
      EXPECT_LE(max_abs_diff(outs[k], direct.ensemble.states()[k].matrix()), 1e-9);
    const auto split = pg_split_check(povm, probe);
    EXPECT_LE(split.defect, 5e-7);
  }
}

}  // namespace
}  // namespace backflow
