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

#include "backflow/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/parallel.hpp"

namespace backflow {

namespace {

ProbeSpec with_lambda(const ProbeSpec& spec, double lambda) {
  ProbeSpec s = spec;
  s.lambda = lambda;
  return s;
}

std::vector<CMatrix> evolve_states(const std::vector<DensityMatrix>& states,
                                   const QuantumChannel& lifted) {
  std::vector<CMatrix> out;
  for (const auto& s : states) out.push_back(hermitian_part(lifted.apply(s.matrix())));
  return out;
}

double ensemble_pg(const std::vector<double>& probs, const std::vector<CMatrix>& states,
                   double gap_tol) {
  std::vector<CMatrix> w;
  for (std::size_t i = 0; i < probs.size(); ++i) w.push_back(states[i] * probs[i]);
  PgOptions opts;
  opts.gap_tol = gap_tol;
  return pg_opt_weighted(w, opts).pg_primal;
}

}  // namespace

void ProbeSpec::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DimensionError("probe: lambda must lie in [0, 1)");
  if (dim_s == 0 || dim_ancilla == 0) throw DimensionError("probe: dimensions must be positive");
  if (dim_ancilla > dim_s) throw DimensionError("probe: dim A' must not exceed d_S");
  if (base_ensemble.dim() != dim_sa())
    throw DimensionError("probe: base ensemble must live on S (x) A' (dimension " +
                         std::to_string(dim_sa()) + ")");
  if (sigma.dim() != dim_sa()) throw DimensionError("probe: sigma must live on S (x) A'");
  for (double p : base_ensemble.probs())
    if (!(p > 0.0)) throw InvalidStateError("probe: base ensemble weights must be positive");
}

ProbeSpec make_probe_spec(Ensemble base, std::size_t dim_s, std::size_t dim_ancilla,
                          double lambda, std::optional<DensityMatrix> sigma) {
  DensityMatrix sig = sigma ? *sigma : DensityMatrix::maximally_mixed(dim_s * dim_ancilla);
  ProbeSpec spec{std::move(base), std::move(sig), lambda, dim_s, dim_ancilla};
  spec.validate();
  return spec;
}

std::vector<std::string> preset_ensemble_names() { return {"basis", "skewed3"}; }

Ensemble preset_ensemble(const std::string& name, std::size_t dim_s, std::size_t dim_ancilla,
                         std::size_t n_bar) {
  const std::size_t d = dim_s * dim_ancilla;
  if (name == "basis") {
    if (n_bar < 1 || n_bar > d)
      throw ConfigError("preset 'basis' needs 1 <= n_bar <= d_S * d_A'");
    std::vector<DensityMatrix> states;
    for (std::size_t i = 0; i < n_bar; ++i) states.push_back(DensityMatrix::basis_state(d, i));
    return Ensemble(ProbabilityDistribution::uniform(n_bar), std::move(states));
  }
  if (name == "skewed3") {
    if (dim_s != 2 || dim_ancilla != 1 || n_bar != 3)
      throw ConfigError("preset 'skewed3' needs a qubit S, trivial A' and n_bar = 3");
    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<cplx> plus{r, r};
    return Ensemble(std::vector<double>{0.2, 0.3, 0.5},
                    {DensityMatrix::basis_state(2, 0), DensityMatrix::pure(plus),
                     DensityMatrix::basis_state(2, 1)});
  }
  throw ConfigError("unknown base ensemble preset '" + name + "'");
}

DensityMatrix build_probe(const ProbeSpec& spec) {
  spec.validate();
  return DensityMatrix(probe_state_matrix(evolved_structure(spec, QuantumChannel::identity(spec.dim_s))));
}

ProbeStructure evolved_structure(const ProbeSpec& spec, const QuantumChannel& channel) {
  if (channel.dim_in() != spec.dim_s || channel.dim_out() != spec.dim_s)
    throw DimensionError("probe: channel does not act on S");
  const auto lifted = tensor_with_identity(channel, spec.dim_ancilla, Side::kRight);
  ProbeStructure ps;
  ps.probs = spec.base_ensemble.probs();
  ps.states = evolve_states(spec.base_ensemble.states(), lifted);
  ps.sigma = hermitian_part(lifted.apply(spec.sigma.matrix()));
  ps.lambda = spec.lambda;
  return ps;
}

std::size_t grid_index(const Trajectory& traj, double t) {
  for (std::size_t k = 0; k < traj.grid.size(); ++k)
    if (std::abs(traj.grid[k] - t) <= 1e-12) return k;
  throw DimensionError("time " + std::to_string(t) + " is not on the trajectory grid");
}

DensityMatrix evolve_probe(const ProbeSpec& spec, const Trajectory& traj, double t) {
  spec.validate();
  const auto& ch = traj.channels[grid_index(traj, t)];
  const std::size_t n = spec.n_bar();
  const auto right = tensor_with_identity(ch, spec.dim_ancilla * (n + 1), Side::kRight);
  const auto full = tensor_with_identity(right, n, Side::kLeft);
  return DensityMatrix(hermitian_part(full.apply(build_probe(spec).matrix())));
}

Ensemble evolve_ensemble(const Ensemble& ensemble, std::size_t dim_ancilla,
                         const Trajectory& traj, double t) {
  const auto& ch = traj.channels[grid_index(traj, t)];
  if (ensemble.dim() != ch.dim_in() * dim_ancilla)
    throw DimensionError("evolve_ensemble: ensemble does not live on S (x) A'");
  const auto lifted = tensor_with_identity(ch, dim_ancilla, Side::kRight);
  std::vector<DensityMatrix> states;
  for (const auto& m : evolve_states(ensemble.states(), lifted)) states.emplace_back(m);
  return Ensemble(ensemble.probs(), std::move(states));
}

std::vector<double> default_lambdas() { return {0.5, 0.9, 0.99, 0.999}; }

WitnessReport scan_backflow(const ProbeSpec& spec, const Trajectory& traj,
                            const ScanOptions& options) {
  spec.validate();
  if (traj.grid.size() < 2) throw DimensionError("scan_backflow: grid needs at least 2 points");
  const std::size_t n_pts = traj.grid.size();
  const ProbabilityDistribution dist(spec.base_ensemble.probs());
  const double gap_tol = options.correlation.gap_tol;

  std::vector<ProbeStructure> structures(n_pts);
  std::vector<DensityMatrix> probes;
  std::vector<std::optional<CorrelationResult>> results(n_pts);
  std::vector<double> pg_ens(n_pts);
  parallel_for(n_pts, [&](std::size_t k) {
    structures[k] = evolved_structure(spec, traj.channels[k]);
    pg_ens[k] = ensemble_pg(structures[k].probs, structures[k].states, gap_tol);
  });
  for (const auto& s : structures) probes.emplace_back(probe_state_matrix(s));
  parallel_for(n_pts, [&](std::size_t k) {
    results[k] = c_a_measure(probes[k], spec.dims(), dist, options.correlation);
  });

  std::vector<std::size_t> injected(n_pts, 0);
  if (options.cross_inject) {
    CorrelationOptions single = options.correlation;
    single.use_projective_init = false;
    single.use_pgm_init = false;
    single.n_restarts = 0;
    for (std::size_t k = n_pts - 1; k-- > 0;) {
      single.extra_inits = {results[k + 1]->a_povm};
      auto again = c_a_measure(probes[k], spec.dims(), dist, single);
      injected[k] = 1;
      if (again.pg_inner > results[k]->pg_inner) {
        again.best_init = "inject:next";
        again.projective_pg = results[k]->projective_pg;
        results[k] = std::move(again);
      }
    }
  }

  WitnessReport report;
  report.lambda = spec.lambda;
  report.grid = traj.grid;
  for (std::size_t k = 0; k < n_pts; ++k) {
    const auto& r = *results[k];
    const auto split = pg_split_check(r.a_povm, structures[k], gap_tol);
    ScanPoint p;
    p.time = traj.grid[k];
    p.c_value = r.value;
    p.c_projective = r.projective_pg - dist.max();
    p.pg_ensemble = pg_ens[k];
    p.pg_perp = split.pg_perp;
    p.pg_par = split.pg_par;
    p.split_defect = split.defect;
    p.gap = r.max_gap;
    p.restarts_used = r.restarts_used + injected[k];
    p.converged = r.converged;
    p.best_init = r.best_init;
    p.a_povm = r.a_povm;
    report.converged = report.converged && p.converged;
    report.points.push_back(std::move(p));
  }

  const auto cp = cp_divisibility_scan(traj);
  for (std::size_t k = 0; k + 1 < n_pts; ++k) {
    ScanStep s;
    s.t_early = cp[k].t_early;
    s.t_late = cp[k].t_late;
    s.min_choi_eig = cp[k].min_choi_eig;
    s.tp_defect = cp[k].tp_defect;
    s.inversion_condition = cp[k].inversion_condition;
    s.verdict = cp[k].verdict;
    s.delta_c = report.points[k + 1].c_value - report.points[k].c_value;
    s.delta_pg_ensemble = report.points[k + 1].pg_ensemble - report.points[k].pg_ensemble;
    s.backflow = s.delta_c > options.significance;
    s.consistent = !(s.backflow && s.verdict == CpVerdict::kCp);
    s.matches_cp = s.backflow == (s.verdict == CpVerdict::kNonCp);
    if (s.backflow) report.backflow_intervals.push_back({s.t_early, s.t_late, s.delta_c});
    report.steps.push_back(s);
  }
  return report;
}

LambdaSweep sweep_lambda(const ProbeSpec& spec, const Trajectory& traj,
                         const std::vector<double>& lambdas, const ScanOptions& options) {
  LambdaSweep sweep;
  for (double l : lambdas) sweep.reports.push_back(scan_backflow(with_lambda(spec, l), traj, options));
  const std::size_t n_steps = traj.grid.size() - 1;
  std::vector<std::size_t> order(lambdas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lambdas[a] < lambdas[b]; });
  sweep.lambda_bar.assign(n_steps, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < n_steps; ++j) {
    for (std::size_t pos = order.size(); pos-- > 0;) {
      if (!sweep.reports[order[pos]].steps[j].backflow) break;
      sweep.lambda_bar[j] = lambdas[order[pos]];
    }
  }
  return sweep;
}

EnsembleSearchResult search_ensemble(const Trajectory& traj, std::size_t k_early,
                                     std::size_t k_late, std::size_t n_bar,
                                     std::size_t dim_ancilla, std::size_t n_trials,
                                     std::uint64_t seed) {
  if (k_early >= k_late || k_late >= traj.channels.size())
    throw DimensionError("search_ensemble: interval must be a forward pair of grid indices");
  if (n_bar == 0) throw DimensionError("search_ensemble: n_bar must be positive");
  const std::size_t ds = traj.family.dim();
  if (dim_ancilla == 0 || dim_ancilla > ds)
    throw DimensionError("search_ensemble: need 1 <= dim A' <= d_S");
  const std::size_t d = ds * dim_ancilla;
  const auto early = tensor_with_identity(traj.channels[k_early], dim_ancilla, Side::kRight);
  const auto late = tensor_with_identity(traj.channels[k_late], dim_ancilla, Side::kRight);

  struct Candidate {
    std::vector<double> probs;
    std::vector<DensityMatrix> states;
    double delta = -std::numeric_limits<double>::infinity();
    double pg_early = 0.0, pg_late = 0.0;
  };
  std::size_t evaluations = 0;
  const auto evaluate = [&](Candidate& c) {
    c.pg_early = ensemble_pg(c.probs, evolve_states(c.states, early), kDefaultGapTol);
    c.pg_late = ensemble_pg(c.probs, evolve_states(c.states, late), kDefaultGapTol);
    c.delta = c.pg_late - c.pg_early;
    ++evaluations;
  };

  Candidate best;
  const auto consider = [&](Candidate c) {
    evaluate(c);
    if (c.delta > best.delta) best = std::move(c);
  };

  // Computational-basis ensembles: every n_bar-subset in lexicographic order
  // (capped), uniform weights.
  if (n_bar <= d) {
    std::vector<std::size_t> idx(n_bar);
    std::iota(idx.begin(), idx.end(), 0);
    for (int count = 0; count < 64; ++count) {
      Candidate c;
      c.probs.assign(n_bar, 1.0 / static_cast<double>(n_bar));
      for (auto i : idx) c.states.push_back(DensityMatrix::basis_state(d, i));
      consider(std::move(c));
      std::size_t pos = n_bar;
      while (pos > 0 && idx[pos - 1] == d - n_bar + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < n_bar; ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  // Pulled-back witnesses: X with Lambda_early(X) = Y for a pure target Y,
  // split into weighted positive and negative parts. When the intermediate
  // map sends Y to a non-positive operator, the Helstrom value of this pair
  // grows over the interval.
  if (n_bar >= 2) {
    const auto early_inv = inverse(early.superop());
    const auto pull_back = [&](const CMatrix& y) {
      CMatrix v(d * d, 1);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) v(i + j * d, 0) = y(i, j);
      const CMatrix w = early_inv * v;
      CMatrix x(d, d);
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) x(i, j) = w(i + j * d, 0);
      const auto eig = herm_eig_unchecked(hermitian_part(x));
      CMatrix pos(d, d), neg(d, d);
      double tp = 0.0, tn = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        std::vector<cplx> col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = eig.vectors(i, k);
        const double l = eig.values[k];
        if (l > 0.0) {
          pos += CMatrix::outer(col) * l;
          tp += l;
        } else {
          neg += CMatrix::outer(col) * (-l);
          tn -= l;
        }
      }
      if (tp <= 1e-12 || tn <= 1e-12) return;
      Candidate c;
      c.probs.assign(n_bar, 0.0);
      c.probs[0] = tp / (tp + tn);
      c.probs[1] = tn / (tp + tn);
      c.states.emplace_back(hermitian_part(pos * (1.0 / tp)));
      c.states.emplace_back(hermitian_part(neg * (1.0 / tn)));
      for (std::size_t i = 2; i < n_bar; ++i) c.states.push_back(c.states.front());
      consider(std::move(c));
    };
    if (dim_ancilla == ds) {
      std::vector<cplx> phi(d);
      for (std::size_t i = 0; i < ds; ++i) phi[i * dim_ancilla + i] = 1.0 / std::sqrt(double(ds));
      pull_back(CMatrix::outer(phi));
    }
    Rng wrng(seed, 0x9B1Cu);
    for (int k = 0; k < 16; ++k) pull_back(CMatrix::outer(random_pure_vector(d, wrng)));
  }

  Rng rng(seed, 0x5EA4u);
  for (std::size_t t = 0; t < n_trials; ++t) {
    Candidate c;
    c.probs = random_distribution(n_bar, rng).weights();
    for (std::size_t i = 0; i < n_bar; ++i)
      c.states.push_back(random_state(d, rng.uniform() < 0.5 ? 1 : 1 + rng.below(d), rng));
    consider(std::move(c));
  }

  // Coordinate refinement: perturb one state (or the weights) at a time.
  double step = 0.5;
  for (int round = 0; round < 12 && step > 1e-4; ++round) {
    bool improved = false;
    for (std::size_t i = 0; i <= n_bar; ++i) {
      Candidate c = best;
      if (i < n_bar) {
        const auto psi = random_pure_vector(d, rng);
        c.states[i] = DensityMatrix(c.states[i].matrix() * (1.0 - step) + CMatrix::outer(psi) * step);
      } else {
        const auto r = random_distribution(n_bar, rng).weights();
        for (std::size_t j = 0; j < n_bar; ++j) c.probs[j] = (1.0 - step) * c.probs[j] + step * r[j];
      }
      evaluate(c);
      if (c.delta > best.delta) {
        best = std::move(c);
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }

  return {Ensemble(best.probs, best.states), best.delta, best.pg_early, best.pg_late, evaluations};
}

}  // namespace backflow
