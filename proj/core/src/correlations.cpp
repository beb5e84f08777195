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

#include "backflow/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/parallel.hpp"
#include "povm_sdp.hpp"

namespace backflow {

namespace {

constexpr double kLiftMargin = 1e-14;

void check_dims(const CMatrix& rho, std::array<std::size_t, 2> dims) {
  if (dims[0] == 0 || dims[1] == 0 || rho.rows() != dims[0] * dims[1])
    throw DimensionError("bipartite dimensions do not match the state");
}

bool marginal_is_diag(const CMatrix& marginal, const ProbabilityDistribution& dist) {
  if (marginal.rows() != dist.size()) return false;
  for (std::size_t i = 0; i < marginal.rows(); ++i)
    for (std::size_t j = 0; j < marginal.cols(); ++j) {
      const cplx want = i == j ? cplx(dist[i]) : cplx{};
      if (std::abs(marginal(i, j) - want) > 1e-9) return false;
    }
  return true;
}

struct SeesawRun {
  std::vector<CMatrix> a;
  DiscriminationResult b;
  std::vector<std::pair<int, double>> trace;
  double max_gap = 0.0;
  bool converged = true;
};

SeesawRun run_seesaw(const DensityMatrix& rho, std::array<std::size_t, 2> dims,
                     const PPovmConstraint& constraint, std::vector<CMatrix> a0,
                     const CorrelationOptions& options) {
  PgOptions pg_opts;
  pg_opts.gap_tol = options.gap_tol;
  SeesawRun run;
  run.a = std::move(a0);
  run.b = pg_opt_weighted(conditional_operators(rho.matrix(), dims, run.a), pg_opts);
  run.max_gap = run.b.gap;
  run.converged = run.b.converged;
  run.trace.emplace_back(0, run.b.pg_primal);
  if (run.a.size() == 1) return run;

  for (int round = 1; round <= options.max_rounds; ++round) {
    const auto a_step = opt_a_step(rho, dims, run.b.povm, constraint, options.gap_tol);
    auto b_step = pg_opt_weighted(
        conditional_operators(rho.matrix(), dims, a_step.a_povm.effects()), pg_opts);
    const double gain = b_step.pg_primal - run.b.pg_primal;
    if (gain <= 0.0) break;
    run.a = a_step.a_povm.effects();
    run.max_gap = std::max({run.max_gap, a_step.gap, b_step.gap});
    run.converged = run.converged && a_step.converged && b_step.converged;
    run.b = std::move(b_step);
    run.trace.emplace_back(round, run.b.pg_primal);
    if (gain < options.gain_tol) break;
  }
  return run;
}

}  // namespace

PPovmCheck is_ppovm(const Povm& povm, const PPovmConstraint& constraint) {
  if (povm.size() != constraint.target_dist.size())
    throw DimensionError("is_ppovm: outcome count differs from the target distribution");
  if (povm.dim() != constraint.marginal.dim())
    throw DimensionError("is_ppovm: POVM and marginal dimensions differ");
  PPovmCheck check;
  const auto probs = povm.probabilities(constraint.marginal.matrix());
  for (std::size_t i = 0; i < probs.size(); ++i)
    check.max_defect = std::max(check.max_defect, std::abs(probs[i] - constraint.target_dist[i]));
  check.ok = check.max_defect <= constraint.tol;
  return check;
}

std::vector<CMatrix> repair_ppovm(std::vector<CMatrix> effects, const CMatrix& marginal,
                                  std::span<const double> probs) {
  if (effects.size() != probs.size())
    throw DimensionError("repair_ppovm: outcome count mismatch");
  effects = repair_povm(std::move(effects));
  const std::size_t d = marginal.rows();
  const CMatrix id = CMatrix::identity(d);
  double mix = 0.0;
  for (std::size_t i = 0; i < effects.size(); ++i) {
    effects[i] += id * (probs[i] - re_trace_product(marginal, effects[i]));
    const double lmin = min_eigenvalue(hermitian_part(effects[i]));
    if (lmin < 0.0) mix = std::max(mix, -lmin / (probs[i] - lmin));
  }
  if (mix > 0.0)
    for (std::size_t i = 0; i < effects.size(); ++i)
      effects[i] = effects[i] * (1.0 - mix) + id * (mix * probs[i]);
  return effects;
}

std::vector<CMatrix> a_side_gains(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                  std::span<const CMatrix> b_effects) {
  check_dims(rho_ab, dims);
  const std::size_t da = dims[0], db = dims[1];
  std::vector<CMatrix> gains;
  for (const auto& q : b_effects) {
    if (q.rows() != db) throw DimensionError("a_side_gains: effect dimension mismatch");
    CMatrix t(da, da);
    for (std::size_t a = 0; a < da; ++a)
      for (std::size_t a2 = 0; a2 < da; ++a2) {
        cplx s{};
        for (std::size_t b = 0; b < db; ++b)
          for (std::size_t b2 = 0; b2 < db; ++b2) s += rho_ab(a * db + b, a2 * db + b2) * q(b2, b);
        t(a, a2) = s;
      }
    gains.push_back(hermitian_part(t));
  }
  return gains;
}

AStepResult opt_linear_ppovm(std::span<const CMatrix> gains, const PPovmConstraint& constraint,
                             double gap_tol) {
  const std::size_t n = gains.size();
  if (n != constraint.target_dist.size())
    throw DimensionError("opt_a_step: outcome count differs from the target distribution");
  const CMatrix& rho = constraint.marginal.matrix();
  const std::size_t d = rho.rows();
  for (const auto& g : gains)
    if (g.rows() != d) throw DimensionError("opt_a_step: gain dimension mismatch");
  const auto& probs = constraint.target_dist.weights();

  AStepResult r;
  std::vector<CMatrix> effects;
  CMatrix y;
  std::vector<double> mu(n, 0.0);
  if (n == 1) {
    effects = {CMatrix::identity(d)};
    y = hermitian_part(gains[0]);
    r.converged = true;
  } else {
    const auto sol = detail::solve_povm_sdp(gains, &rho, probs, 1e-11, 150);
    effects = repair_ppovm(sol.effects, rho, probs);
    y = sol.y;
    mu = sol.mu;
    r.iterations = sol.iterations;
  }
  double eps = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    eps = std::max(eps, max_eigenvalue(hermitian_part(gains[i] - y - rho * mu[i])));
  r.dual_Y = y + CMatrix::identity(d) * (eps + kLiftMargin);
  r.dual_mu = mu;
  r.dual_objective = r.dual_Y.trace().real();
  for (std::size_t i = 0; i < n; ++i) r.dual_objective += mu[i] * probs[i];
  r.objective = success_probability(gains, effects);
  r.a_povm = Povm(std::move(effects));
  r.gap = r.dual_objective - r.objective;
  r.converged = r.gap <= gap_tol;
  return r;
}

AStepResult opt_a_step(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                       const Povm& b_povm, const PPovmConstraint& constraint, double gap_tol) {
  if (constraint.marginal.dim() != dims[0])
    throw DimensionError("opt_a_step: constraint marginal does not live on A");
  if (b_povm.size() != constraint.target_dist.size())
    throw DimensionError("opt_a_step: B measurement and target distribution sizes differ");
  const auto gains = a_side_gains(rho_ab.matrix(), dims, b_povm.effects());
  return opt_linear_ppovm(gains, constraint, gap_tol);
}

Povm project_to_ppovm(const Povm& povm, const PPovmConstraint& constraint) {
  return opt_linear_ppovm(povm.effects(), constraint).a_povm;
}

Povm random_ppovm(const PPovmConstraint& constraint, Rng& rng) {
  return project_to_ppovm(
      random_povm(constraint.marginal.dim(), constraint.target_dist.size(), rng), constraint);
}

DiscriminationResult pg_for_a_povm(const CMatrix& rho_ab, std::array<std::size_t, 2> dims,
                                   const Povm& a_povm, double gap_tol) {
  check_dims(rho_ab, dims);
  PgOptions opts;
  opts.gap_tol = gap_tol;
  return pg_opt_weighted(conditional_operators(rho_ab, dims, a_povm.effects()), opts);
}

CorrelationResult c_a_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                              const ProbabilityDistribution& dist,
                              const CorrelationOptions& options) {
  check_dims(rho_ab.matrix(), dims);
  const std::size_t n = dist.size();
  const std::array<std::size_t, 1> keep_a{0};
  const DensityMatrix marginal(partial_trace(rho_ab.matrix(), dims, keep_a));
  const PPovmConstraint constraint{dist, marginal};

  // Initializations are described lazily so that the projection SDPs run
  // inside the workers.
  struct Init {
    std::string label;
    std::function<std::vector<CMatrix>()> make;
  };
  std::vector<Init> inits;
  std::optional<Povm> projective;
  if (options.use_projective_init && marginal_is_diag(marginal.matrix(), dist)) {
    projective = Povm::computational(dims[0]);
    inits.push_back({"projective", [&] { return projective->effects(); }});
  }
  if (options.use_pgm_init && n > 1) {
    inits.push_back({"pgm", [&] {
      // Measure B in the eigenbasis of its marginal, discriminate the induced
      // A-side ensemble with the pretty-good measurement and coarse-grain.
      const std::array<std::size_t, 1> keep_b{1};
      const auto eig = herm_eig_unchecked(partial_trace(rho_ab.matrix(), dims, keep_b));
      std::vector<CMatrix> b_proj;
      for (std::size_t j = 0; j < dims[1]; ++j) b_proj.push_back(CMatrix::outer(eig.vectors.column(j)));
      const auto cond = a_side_gains(rho_ab.matrix(), dims, b_proj);
      std::vector<double> w;
      std::vector<DensityMatrix> states;
      for (const auto& c : cond) {
        const double p = c.trace().real();
        w.push_back(std::max(p, 0.0));
        states.emplace_back(p > kNegligibleProbability
                                ? DensityMatrix(c * (1.0 / p))
                                : DensityMatrix::maximally_mixed(dims[0]));
      }
      double total = 0.0;
      for (double x : w) total += x;
      for (double& x : w) x /= total;
      const auto fine = pgm(Ensemble(w, states)).povm;
      std::vector<CMatrix> coarse(n, CMatrix(dims[0], dims[0]));
      for (std::size_t j = 0; j < fine.size(); ++j) coarse[j % n] += fine[j];
      return project_to_ppovm(Povm(repair_povm(coarse)), constraint).effects();
    }});
  }
  const Rng base(options.seed, 0xC0FFEEu);
  for (std::size_t k = 0; k < options.n_restarts; ++k) {
    inits.push_back({"random:" + std::to_string(k), [&, k] {
      Rng rng = base.split(k);
      Povm r = random_povm(dims[0], n, rng);
      if (projective && projective->size() == n) {
        // Walk from the projective candidate toward a fully random POVM.
        const double w = static_cast<double>(k + 1) / static_cast<double>(options.n_restarts);
        std::vector<CMatrix> mixed;
        for (std::size_t i = 0; i < n; ++i)
          mixed.push_back((*projective)[i] * (1.0 - w) + r[i] * w);
        r = Povm(repair_povm(std::move(mixed)));
      }
      return project_to_ppovm(r, constraint).effects();
    }});
  }
  for (std::size_t k = 0; k < options.extra_inits.size(); ++k) {
    inits.push_back({"extra:" + std::to_string(k), [&, k] {
      const Povm& p = options.extra_inits[k];
      if (p.size() != n || p.dim() != dims[0])
        throw DimensionError("c_a_measure: extra initialization has the wrong shape");
      if (is_ppovm(p, constraint).ok)
        return repair_ppovm(p.effects(), marginal.matrix(), dist.weights());
      return project_to_ppovm(p, constraint).effects();
    }});
  }
  if (inits.empty()) inits.push_back({"trivial-split", [&] {
    std::vector<CMatrix> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back(CMatrix::identity(dims[0]) * dist[i]);
    return e;
  }});

  std::vector<std::optional<SeesawRun>> runs(inits.size());
  parallel_for(inits.size(), [&](std::size_t k) {
    runs[k] = run_seesaw(rho_ab, dims, constraint, inits[k].make(), options);
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k]->b.pg_primal > runs[best]->b.pg_primal) best = k;
  auto& win = *runs[best];

  CorrelationResult r;
  r.pg_inner = win.b.pg_primal;
  r.value = r.pg_inner - dist.max();
  r.a_povm = Povm(win.a);
  r.b_povm = win.b.povm;
  r.restarts_used = runs.size();
  r.seesaw_trace = win.trace;
  r.best_init = inits[best].label;
  r.max_gap = win.max_gap;
  r.converged = win.converged;
  r.projective_pg = projective
                        ? pg_for_a_povm(rho_ab.matrix(), dims, *projective, options.gap_tol).pg_primal
                        : std::numeric_limits<double>::quiet_NaN();
  r.side = 'A';
  return r;
}

CorrelationResult c_b_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                              const ProbabilityDistribution& dist,
                              const CorrelationOptions& options) {
  check_dims(rho_ab.matrix(), dims);
  const std::array<std::size_t, 2> perm{1, 0};
  const DensityMatrix swapped(permute_subsystems(rho_ab.matrix(), dims, perm));
  auto r = c_a_measure(swapped, {dims[1], dims[0]}, dist, options);
  r.side = 'B';
  return r;
}

CorrelationResult c_ab_measure(const DensityMatrix& rho_ab, std::array<std::size_t, 2> dims,
                               const ProbabilityDistribution& dist,
                               const CorrelationOptions& options) {
  auto a = c_a_measure(rho_ab, dims, dist, options);
  auto b = c_b_measure(rho_ab, dims, dist, options);
  return b.value > a.value ? b : a;
}

CMatrix probe_state_matrix(const ProbeStructure& probe) {
  const std::size_t n = probe.n(), ds = probe.dim_sa(), na = n + 1;
  if (probe.states.size() != n) throw DimensionError("probe: one state per outcome required");
  const std::size_t db = ds * na;
  CMatrix rho(n * db, n * db);
  for (std::size_t i = 0; i < n; ++i) {
    const CMatrix& ri = probe.states[i];
    if (ri.rows() != ds) throw DimensionError("probe: state dimension differs from sigma");
    for (std::size_t s = 0; s < ds; ++s)
      for (std::size_t s2 = 0; s2 < ds; ++s2) {
        rho(i * db + s * na + i, i * db + s2 * na + i) += probe.probs[i] * probe.lambda * probe.sigma(s, s2);
        rho(i * db + s * na + n, i * db + s2 * na + n) += probe.probs[i] * (1.0 - probe.lambda) * ri(s, s2);
      }
  }
  return rho;
}

PovmDecomposition povm_decomposition(const Povm& a_povm, const ProbeStructure& probe) {
  const std::size_t n = probe.n();
  if (a_povm.size() != n || a_povm.dim() != n)
    throw DimensionError("povm_decomposition: POVM must have n outcomes on an n-level A");
  PovmDecomposition dec;
  dec.e_coeffs.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      dec.e_coeffs[i][k] = a_povm[k](i, i).real() * probe.probs[i] / probe.probs[k];
  for (std::size_t k = 0; k < n; ++k) {
    CMatrix perp(n, n), par(probe.dim_sa(), probe.dim_sa());
    for (std::size_t i = 0; i < n; ++i) {
      perp(i, i) = dec.e_coeffs[i][k];
      par += probe.states[i] * dec.e_coeffs[i][k];
    }
    dec.perp_states.emplace_back(perp);
    dec.par_states.emplace_back(par);
  }
  return dec;
}

std::vector<CMatrix> reconstruct_outputs(const PovmDecomposition& dec,
                                         const ProbeStructure& probe) {
  const std::size_t n = probe.n();
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < n; ++k) {
    CMatrix perp(n + 1, n + 1);
    for (std::size_t i = 0; i < n; ++i) perp(i, i) = dec.perp_states[k].matrix()(i, i);
    CMatrix flag(n + 1, n + 1);
    flag(n, n) = 1.0;
    out.push_back(kron(probe.sigma, perp) * probe.lambda +
                  kron(dec.par_states[k].matrix(), flag) * (1.0 - probe.lambda));
  }
  return out;
}

SplitCheck pg_split_check(const Povm& a_povm, const ProbeStructure& probe, double gap_tol) {
  PgOptions opts;
  opts.gap_tol = gap_tol;
  const auto dec = povm_decomposition(a_povm, probe);
  SplitCheck c;
  c.pg_total = pg_for_a_povm(probe_state_matrix(probe), probe.dims(), a_povm, gap_tol).pg_primal;
  c.pg_perp = pg_opt(Ensemble(probe.probs, dec.perp_states), opts).pg_primal;
  c.pg_par = pg_opt(Ensemble(probe.probs, dec.par_states), opts).pg_primal;
  c.defect = std::abs(c.pg_total - (probe.lambda * c.pg_perp + (1.0 - probe.lambda) * c.pg_par));
  return c;
}

}  // namespace backflow
