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

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "backflow/errors.hpp"
#include "backflow/parallel.hpp"
#include "backflow/probe.hpp"
#include "oracles.hpp"

namespace backflow {
namespace {

TEST(Parallel, CoversEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  EXPECT_GE(worker_count(), 1u);
}

TEST(ProbeSpec, Validation) {
  const auto base = preset_ensemble("basis", 2, 1, 2);
  EXPECT_THROW(make_probe_spec(base, 2, 1, 1.0), DimensionError);
  EXPECT_THROW(make_probe_spec(base, 2, 3, 0.5), DimensionError);
  EXPECT_THROW(make_probe_spec(Ensemble({1.0, 0.0}, base.states()), 2, 1, 0.5), InvalidStateError);
  EXPECT_THROW(preset_ensemble("nope", 2, 1, 2), ConfigError);
  EXPECT_EQ(preset_ensemble("skewed3", 2, 1, 3).size(), 3u);
}

TEST(ProbeSpec, BuildMatchesLayoutFormula) {
  Rng rng(61);
  const Ensemble base({0.4, 0.6}, {random_state(2, 2, rng), random_state(2, 1, rng)});
  const auto spec = make_probe_spec(base, 2, 1, 0.3, random_state(2, 2, rng));
  const auto rho = build_probe(spec).matrix();
  // sum_i p_i |i><i| (x) (lambda sigma (x) |i><i| + (1 - lambda) rho_i (x) |2><2|).
  CMatrix ref(2 * 6, 2 * 6);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto flag_i = CMatrix::unit(3, i, i);
    const auto flag_n = CMatrix::unit(3, 2, 2);
    const auto inner = oracle::kron(spec.sigma.matrix(), flag_i) * 0.3 +
                       oracle::kron(base.states()[i].matrix(), flag_n) * 0.7;
    ref += oracle::kron(CMatrix::unit(2, i, i), inner) * base.probs()[i];
  }
  EXPECT_LE(max_abs_diff(rho, ref), 1e-15);
}

TEST(ProbeSpec, StructuredEvolutionMatchesFullLift) {
  Rng rng(62);
  const auto traj = make_trajectory(DynamicsFamily::eternal(), 0.0, linspace(0.0, 1.0, 4));
  const Ensemble base({0.5, 0.5}, {random_state(4, 1, rng), random_state(4, 2, rng)});
  const auto spec = make_probe_spec(base, 2, 2, 0.7);
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    const auto full = evolve_probe(spec, traj, traj.grid[k]).matrix();
    const auto structured = probe_state_matrix(evolved_structure(spec, traj.channels[k]));
    EXPECT_LE(max_abs_diff(full, structured), 1e-12);
  }
  EXPECT_THROW(grid_index(traj, 0.123), DimensionError);
}

TEST(Scan, DepolarizingHasNoBackflow) {
  const auto traj = make_trajectory(DynamicsFamily::depolarizing(0.7), 0.0, linspace(0.0, 2.0, 12));
  const auto spec = make_probe_spec(preset_ensemble("basis", 2, 1, 2), 2, 1, 0.9);
  const auto rep = scan_backflow(spec, traj);
  EXPECT_TRUE(rep.backflow_intervals.empty());
  for (const auto& s : rep.steps) {
    EXPECT_EQ(s.verdict, CpVerdict::kCp);
    EXPECT_LE(s.delta_c, 3e-7);
    EXPECT_TRUE(s.consistent);
  }
}

TEST(Scan, AmplitudeDampingFlagsGrowingSteps) {
  const auto traj =
      make_trajectory(DynamicsFamily::amplitude_damping(1.0, 3.0), 0.0, linspace(0.0, 1.5, 20));
  const auto spec = make_probe_spec(preset_ensemble("basis", 2, 1, 2), 2, 1, 0.9);
  const auto rep = scan_backflow(spec, traj);
  ASSERT_EQ(rep.points.size(), 20u);
  for (std::size_t k = 0; k < rep.steps.size(); ++k) {
    const double g1 = std::abs(damped_cosine(traj.grid[k], 1.0, 3.0));
    const double g2 = std::abs(damped_cosine(traj.grid[k + 1], 1.0, 3.0));
    EXPECT_EQ(rep.steps[k].backflow, g2 > g1) << k;
    EXPECT_TRUE(rep.steps[k].matches_cp) << k;
  }
  for (const auto& p : rep.points) {
    const double g = damped_cosine(p.time, 1.0, 3.0);
    EXPECT_NEAR(p.pg_ensemble, 0.5 * (1 + g * g), 1e-7);
    EXPECT_LE(p.split_defect, 5e-7);
  }
}

TEST(Scan, LambdaSweepThreshold) {
  const auto traj =
      make_trajectory(DynamicsFamily::amplitude_damping(1.0, 3.0), 0.0, linspace(0.0, 1.5, 8));
  const auto spec = make_probe_spec(preset_ensemble("basis", 2, 1, 2), 2, 1, 0.5);
  const auto sweep = sweep_lambda(spec, traj, {0.5, 0.9});
  ASSERT_EQ(sweep.reports.size(), 2u);
  ASSERT_EQ(sweep.lambda_bar.size(), traj.grid.size() - 1);
  for (std::size_t k = 0; k < sweep.lambda_bar.size(); ++k) {
    if (sweep.reports[0].steps[k].backflow && sweep.reports[1].steps[k].backflow)
      EXPECT_EQ(sweep.lambda_bar[k], 0.5);
    else if (!sweep.reports[1].steps[k].backflow)
      EXPECT_TRUE(std::isnan(sweep.lambda_bar[k]));
  }
}

TEST(Search, FindsEternalBackflowWithAncilla) {
  const auto traj = make_trajectory(DynamicsFamily::eternal(), 0.0, linspace(0.0, 1.5, 30));
  const auto found = search_ensemble(traj, 27, 28, 2, 2, 10, 1);
  EXPECT_GT(found.delta_pg, 1e-5);
  // Without an ancilla the eternal model never raises P_g.
  const auto qubit = search_ensemble(traj, 27, 28, 2, 1, 30, 1);
  EXPECT_LE(qubit.delta_pg, 1e-9);
}

}  // namespace
}  // namespace backflow
