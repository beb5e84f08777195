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

#include <benchmark/benchmark.h>

#include "backflow/correlations.hpp"
#include "backflow/discrimination.hpp"
#include "backflow/dynamics.hpp"
#include "backflow/probe.hpp"

namespace bf = backflow;

namespace {

bf::CMatrix random_hermitian(std::size_t d, bf::Rng& rng) {
  bf::CMatrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  return (g + g.adjoint()) * 0.5;
}

void BM_HermEig(benchmark::State& state) {
  bf::Rng rng(1);
  const auto h = random_hermitian(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(bf::herm_eig(h));
}
BENCHMARK(BM_HermEig)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_PgOpt(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  bf::Rng rng(2);
  std::vector<bf::DensityMatrix> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back(bf::random_state(d, d, rng));
  const bf::Ensemble e(bf::random_distribution(n, rng), states);
  for (auto _ : state) benchmark::DoNotOptimize(bf::pg_opt(e));
}
BENCHMARK(BM_PgOpt)->Args({2, 3})->Args({4, 4})->Args({8, 5})->Unit(benchmark::kMillisecond);

void BM_OptAStep(benchmark::State& state) {
  const auto da = static_cast<std::size_t>(state.range(0));
  const std::size_t db = 3, n = 3;
  bf::Rng rng(3);
  const auto rho = bf::random_state(da * db, 2, rng);
  const std::size_t dims[] = {da, db};
  const std::size_t keep[] = {0};
  const bf::PPovmConstraint c{bf::random_distribution(n, rng),
                              bf::DensityMatrix(bf::partial_trace(rho.matrix(), dims, keep))};
  const auto b = bf::random_povm(db, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(bf::opt_a_step(rho, {da, db}, b, c));
}
BENCHMARK(BM_OptAStep)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ScanAmplitudeDamping(benchmark::State& state) {
  const auto traj = bf::make_trajectory(bf::DynamicsFamily::amplitude_damping(1.0, 3.0), 0.0,
                                        bf::linspace(0.0, 1.5, static_cast<std::size_t>(state.range(0))));
  const auto spec = bf::make_probe_spec(bf::preset_ensemble("basis", 2, 1, 2), 2, 1, 0.99);
  for (auto _ : state) benchmark::DoNotOptimize(bf::scan_backflow(spec, traj));
}
BENCHMARK(BM_ScanAmplitudeDamping)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
