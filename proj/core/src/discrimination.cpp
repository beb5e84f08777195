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

#include "backflow/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "backflow/errors.hpp"
#include "povm_sdp.hpp"

namespace backflow {

namespace {

constexpr std::size_t kMaxOutcomeDim = 512;
// Extra shift on lifted certificates so rounding in the eigensolver cannot
// leave K - A_i with a -1e-16 eigenvalue.
constexpr double kLiftMargin = 1e-14;

void check_weighted(std::span<const CMatrix> weighted) {
  if (weighted.empty()) throw DimensionError("pg_opt: empty ensemble");
  const std::size_t d = weighted.front().rows();
  for (const auto& a : weighted)
    if (a.rows() != d || a.cols() != d)
      throw DimensionError("pg_opt: states have different dimensions");
  if (weighted.size() * d > kMaxOutcomeDim)
    throw DimensionError("pg_opt: n * d = " + std::to_string(weighted.size() * d) +
                         " exceeds the 512 guard");
}

DiscriminationResult certify(std::span<const CMatrix> weighted, std::vector<CMatrix> effects,
                             const CMatrix& k_candidate, double gap_tol) {
  effects = repair_povm(std::move(effects));
  DiscriminationResult r;
  r.pg_primal = success_probability(weighted, effects);
  r.povm = Povm(std::move(effects));
  r.dual_K = lift_dual(weighted, k_candidate);
  r.pg_dual = r.dual_K.trace().real();
  r.gap = r.pg_dual - r.pg_primal;
  r.converged = r.gap <= gap_tol;
  return r;
}

CMatrix primal_dual_guess(std::span<const CMatrix> weighted, std::span<const CMatrix> effects) {
  CMatrix k(weighted.front().rows(), weighted.front().rows());
  for (std::size_t i = 0; i < weighted.size(); ++i) k += weighted[i] * effects[i];
  return hermitian_part(k);
}

std::vector<CMatrix> pgm_effects(std::span<const CMatrix> weighted) {
  const std::size_t d = weighted.front().rows();
  CMatrix s(d, d);
  std::size_t best = 0;
  for (std::size_t i = 0; i < weighted.size(); ++i) {
    s += weighted[i];
    if (weighted[i].trace().real() > weighted[best].trace().real()) best = i;
  }
  const CMatrix t = psd_inv_sqrt(s);
  std::vector<CMatrix> effects;
  for (const auto& a : weighted) effects.push_back(hermitian_part(t * a * t));
  effects[best] += CMatrix::identity(d) - support_projector(s);
  return effects;
}

}  // namespace

double success_probability(std::span<const CMatrix> weighted, std::span<const CMatrix> effects) {
  if (weighted.size() != effects.size())
    throw DimensionError("success_probability: outcome count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < weighted.size(); ++i) s += re_trace_product(weighted[i], effects[i]);
  return s;
}

double success_probability(const Ensemble& ensemble, const Povm& povm) {
  return success_probability(ensemble.weighted_states(), povm.effects());
}

double dual_defect(std::span<const CMatrix> weighted, const CMatrix& k) {
  double worst = 0.0;
  for (const auto& a : weighted) worst = std::max(worst, max_eigenvalue(hermitian_part(a - k)));
  return worst;
}

CMatrix lift_dual(std::span<const CMatrix> weighted, const CMatrix& k) {
  const CMatrix kh = hermitian_part(k);
  double eps = -std::numeric_limits<double>::infinity();
  for (const auto& a : weighted) eps = std::max(eps, max_eigenvalue(hermitian_part(a - kh)));
  return kh + CMatrix::identity(kh.rows()) * (eps + kLiftMargin);
}

std::vector<CMatrix> repair_povm(std::vector<CMatrix> effects) {
  if (effects.empty()) throw DimensionError("repair_povm: no effects");
  const std::size_t d = effects.front().rows();
  CMatrix s(d, d);
  for (auto& e : effects) {
    e = spectral_apply(herm_eig_unchecked(e), [](double v) { return std::max(v, 0.0); });
    s += e;
  }
  const CMatrix t = psd_inv_sqrt(s);
  for (auto& e : effects) e = hermitian_part(t * e * t);
  const CMatrix rest = CMatrix::identity(d) - support_projector(s);
  if (rest.trace().real() > 0.5) effects.front() += rest;
  return effects;
}

DiscriminationResult helstrom_weighted(const CMatrix& a1, const CMatrix& a2) {
  const std::size_t d = a1.rows();
  const auto eig = herm_eig_unchecked(a1 - a2);
  const CMatrix p1 = spectral_apply(eig, [](double v) { return v >= 0.0 ? 1.0 : 0.0; });
  const CMatrix abs_delta = spectral_apply(eig, [](double v) { return std::abs(v); });
  const std::vector<CMatrix> weighted{a1, a2};
  auto r = certify(weighted, {p1, CMatrix::identity(d) - p1}, (a1 + a2 + abs_delta) * 0.5,
                   kDefaultGapTol);
  r.method = "helstrom";
  r.converged = true;
  return r;
}

DiscriminationResult helstrom(const Ensemble& ensemble) {
  if (ensemble.size() != 2) throw DimensionError("helstrom: needs exactly two states");
  const auto w = ensemble.weighted_states();
  return helstrom_weighted(w[0], w[1]);
}

PgmResult pgm(const Ensemble& ensemble) {
  const auto w = ensemble.weighted_states();
  auto effects = repair_povm(pgm_effects(w));
  const double pg = success_probability(w, effects);
  return {pg, Povm(std::move(effects))};
}

namespace {

DiscriminationResult solve_weighted(std::span<const CMatrix> weighted, const PgOptions& options) {
  const std::size_t n = weighted.size();
  const std::size_t d = weighted.front().rows();
  if (n == 1) {
    auto r = certify(weighted, {CMatrix::identity(d)}, weighted.front(), options.gap_tol);
    r.method = "trivial";
    return r;
  }
  if (n == 2) {
    auto r = helstrom_weighted(weighted[0], weighted[1]);
    r.converged = r.gap <= options.gap_tol;
    return r;
  }

  // Fixed point P_i <- G^-1/2 A_i P_i A_i G^-1/2 with G = sum_j A_j P_j A_j,
  // whose fixed points satisfy the optimality condition A_i P_i = K P_i.
  std::vector<CMatrix> p = pgm_effects(weighted);
  auto best = certify(weighted, p, primal_dual_guess(weighted, p), options.gap_tol);
  best.method = "fixed_point";
  int it = 0;
  for (; it < options.fixed_point_iterations && !best.converged; ++it) {
    CMatrix g(d, d);
    std::vector<CMatrix> num;
    for (std::size_t i = 0; i < n; ++i) {
      num.push_back(hermitian_part(weighted[i] * p[i] * weighted[i]));
      g += num.back();
    }
    const CMatrix t = psd_inv_sqrt(g);
    for (std::size_t i = 0; i < n; ++i) p[i] = hermitian_part(t * num[i] * t);
    if ((it + 1) % 5 == 0) {
      auto cand = certify(weighted, p, primal_dual_guess(weighted, p), options.gap_tol);
      if (cand.gap < best.gap) best = std::move(cand);
      best.method = "fixed_point";
    }
  }
  best.iterations = it;
  if (best.converged) return best;

  const auto sol = detail::solve_povm_sdp(weighted, nullptr, {}, options.ipm_tol, options.max_iter);
  auto from_y = certify(weighted, sol.effects, sol.y, options.gap_tol);
  auto from_p = certify(weighted, sol.effects, primal_dual_guess(weighted, sol.effects),
                        options.gap_tol);
  auto& chosen = from_y.gap <= from_p.gap ? from_y : from_p;
  chosen.iterations = it + sol.iterations;
  chosen.method = "interior_point";
  if (chosen.gap < best.gap) return chosen;
  return best;
}

}  // namespace

DiscriminationResult pg_opt_weighted(std::span<const CMatrix> weighted,
                                     const PgOptions& options) {
  check_weighted(weighted);
  auto r = solve_weighted(weighted, options);
  // Always guessing the heaviest outcome is feasible; never report less.
  std::size_t heavy = 0;
  for (std::size_t i = 1; i < weighted.size(); ++i)
    if (weighted[i].trace().real() > weighted[heavy].trace().real()) heavy = i;
  const double p_heavy = weighted[heavy].trace().real();
  if (r.pg_primal < p_heavy) {
    const std::size_t d = weighted.front().rows();
    std::vector<CMatrix> effects(weighted.size(), CMatrix(d, d));
    effects[heavy] = CMatrix::identity(d);
    r.povm = Povm(std::move(effects));
    r.pg_primal = p_heavy;
    r.gap = r.pg_dual - r.pg_primal;
    r.converged = r.gap <= options.gap_tol;
  }
  return r;
}

DiscriminationResult pg_opt(const Ensemble& ensemble, const PgOptions& options) {
  const auto w = ensemble.weighted_states();
  return pg_opt_weighted(w, options);
}

}  // namespace backflow
