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

#include "backflow/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

#include "backflow/errors.hpp"

namespace backflow::sdp {

namespace {

double max_step(const CMatrix& x, const CMatrix& dx) {
  const CMatrix li = lower_triangular_inverse(cholesky(x));
  const double lmin = min_eigenvalue(hermitian_part(li * dx * li.adjoint()));
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

// sum_k w_k A_k restricted to each block.
std::vector<CMatrix> adjoint_map(const Problem& p, const std::vector<double>& w) {
  std::vector<CMatrix> out;
  for (const auto& c : p.cost) out.emplace_back(c.rows(), c.cols());
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    if (w[k] == 0.0) continue;
    for (const auto& e : p.constraints[k].entries) out[e.block](e.row, e.col) += w[k] * e.value;
  }
  return out;
}

}  // namespace

double apply_constraint(const Constraint& c, const std::vector<CMatrix>& x) {
  double s = 0.0;
  for (const auto& e : c.entries) s += (e.value * x[e.block](e.col, e.row)).real();
  return s;
}

std::size_t add_identity_sum(Problem& problem, std::size_t dim,
                             const std::vector<std::uint32_t>& blocks) {
  const std::size_t first = problem.constraints.size();
  const double r = 1.0 / std::sqrt(2.0);
  const auto u = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
  for (std::size_t j = 0; j < dim; ++j) {
    Constraint c;
    c.rhs = 1.0;
    for (auto b : blocks) c.entries.push_back({b, u(j), u(j), 1.0});
    problem.constraints.push_back(std::move(c));
  }
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t k = j + 1; k < dim; ++k) {
      Constraint re, im;
      for (auto b : blocks) {
        re.entries.push_back({b, u(j), u(k), r});
        re.entries.push_back({b, u(k), u(j), r});
        im.entries.push_back({b, u(j), u(k), cplx(0.0, r)});
        im.entries.push_back({b, u(k), u(j), cplx(0.0, -r)});
      }
      problem.constraints.push_back(std::move(re));
      problem.constraints.push_back(std::move(im));
    }
  return first;
}

CMatrix hermitian_basis_element(std::size_t dim, std::size_t k) {
  CMatrix e(dim, dim);
  if (k < dim) {
    e(k, k) = 1.0;
    return e;
  }
  const double r = 1.0 / std::sqrt(2.0);
  std::size_t idx = dim;
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t l = j + 1; l < dim; ++l, idx += 2) {
      if (idx == k) {
        e(j, l) = r;
        e(l, j) = r;
        return e;
      }
      if (idx + 1 == k) {
        e(j, l) = cplx(0.0, r);
        e(l, j) = cplx(0.0, -r);
        return e;
      }
    }
  throw DimensionError("hermitian_basis_element: index out of range");
}

std::size_t add_trace_constraint(Problem& problem, const CMatrix& rho, std::uint32_t block,
                                 double rhs) {
  Constraint c;
  c.rhs = rhs;
  for (std::size_t i = 0; i < rho.rows(); ++i)
    for (std::size_t j = 0; j < rho.cols(); ++j)
      if (rho(i, j) != cplx{})
        c.entries.push_back(
            {block, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), rho(i, j)});
  problem.constraints.push_back(std::move(c));
  return problem.constraints.size() - 1;
}

Solution solve(const Problem& problem, const Options& options) {
  const std::size_t nb = problem.cost.size();
  const std::size_t m = problem.constraints.size();
  if (nb == 0) throw DimensionError("sdp::solve: no blocks");
  std::size_t n_total = 0;
  double c_scale = 0.0, b_scale = 0.0;
  for (const auto& c : problem.cost) {
    if (!c.is_square()) throw DimensionError("sdp::solve: cost blocks must be square");
    n_total += c.rows();
    c_scale = std::max(c_scale, c.max_abs());
  }
  for (const auto& c : problem.constraints) {
    b_scale = std::max(b_scale, std::abs(c.rhs));
    for (const auto& e : c.entries)
      if (e.block >= nb || e.row >= problem.cost[e.block].rows() ||
          e.col >= problem.cost[e.block].rows())
        throw DimensionError("sdp::solve: constraint entry out of range");
  }

  Solution s;
  s.y.assign(m, 0.0);
  for (const auto& c : problem.cost) {
    s.x.push_back(CMatrix::identity(c.rows()));
    s.z.push_back(CMatrix::identity(c.rows()) * (1.0 + c_scale));
  }

  std::vector<std::vector<std::size_t>> by_block(nb);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<bool> seen(nb, false);
    for (const auto& e : problem.constraints[k].entries)
      if (!seen[e.block]) {
        seen[e.block] = true;
        by_block[e.block].push_back(k);
      }
  }

  for (int it = 0; it <= options.max_iter; ++it) {
    s.iterations = it;
    std::vector<CMatrix> zi;
    try {
      for (const auto& z : s.z) zi.push_back(hpd_inverse(z));
    } catch (const Error&) {
      break;
    }
    std::vector<double> rp(m);
    double pinf = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      rp[k] = problem.constraints[k].rhs - apply_constraint(problem.constraints[k], s.x);
      pinf = std::max(pinf, std::abs(rp[k]));
    }
    const auto aty = adjoint_map(problem, s.y);
    std::vector<CMatrix> rd;
    double dinf = 0.0, mu = 0.0;
    s.primal_objective = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      rd.push_back(hermitian_part(problem.cost[b] - aty[b] - s.z[b]));
      dinf = std::max(dinf, rd.back().max_abs());
      mu += re_trace_product(s.x[b], s.z[b]);
      s.primal_objective += re_trace_product(problem.cost[b], s.x[b]);
    }
    mu /= static_cast<double>(n_total);
    s.dual_objective = 0.0;
    for (std::size_t k = 0; k < m; ++k) s.dual_objective += problem.constraints[k].rhs * s.y[k];
    s.primal_infeasibility = pinf / (1.0 + b_scale);
    s.dual_infeasibility = dinf / (1.0 + c_scale);
    const double rel_gap = std::abs(s.primal_objective - s.dual_objective) /
                           (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective));
    const double rel_mu = mu * static_cast<double>(n_total) /
                          (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective));
    if (rel_gap < options.tol && rel_mu < options.tol && s.primal_infeasibility < options.tol &&
        s.dual_infeasibility < options.tol) {
      s.converged = true;
      break;
    }
    if (it == options.max_iter) break;

    // Schur complement M_kl = Re Tr(A_k X A_l Z^-1).
    std::vector<double> mat(m * m, 0.0);
    std::vector<CMatrix> w(nb);
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t b = 0; b < nb; ++b) w[b] = CMatrix();
      for (const auto& e : problem.constraints[l].entries) {
        auto& wb = w[e.block];
        const auto& xb = s.x[e.block];
        const auto& zb = zi[e.block];
        const std::size_t d = xb.rows();
        if (wb.empty()) wb = CMatrix(d, d);
        for (std::size_t p = 0; p < d; ++p) {
          const cplx xv = xb(p, e.row) * e.value;
          if (xv == cplx{}) continue;
          for (std::size_t q = 0; q < d; ++q) wb(p, q) += xv * zb(e.col, q);
        }
      }
      for (std::size_t b = 0; b < nb; ++b) {
        if (w[b].empty()) continue;
        for (std::size_t k : by_block[b]) {
          if (k > l) continue;
          double acc = 0.0;
          for (const auto& e : problem.constraints[k].entries)
            if (e.block == b) acc += (e.value * w[b](e.col, e.row)).real();
          mat[k * m + l] += acc;
        }
      }
    }
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = 0; l < k; ++l) mat[k * m + l] = mat[l * m + k];

    // Direction for a complementarity target R: dX = R Z^-1 - X - X dZ Z^-1.
    const auto direction = [&](const std::vector<CMatrix>& r, std::vector<CMatrix>& dx,
                               std::vector<CMatrix>& dz, std::vector<double>& dy) {
      std::vector<CMatrix> h;
      for (std::size_t b = 0; b < nb; ++b) {
        CMatrix hb = -s.x[b] - s.x[b] * rd[b] * zi[b];
        if (!r[b].empty()) hb += r[b] * zi[b];
        h.push_back(std::move(hb));
      }
      dy.assign(m, 0.0);
      for (std::size_t k = 0; k < m; ++k)
        dy[k] = rp[k] - apply_constraint(problem.constraints[k], h);
      if (!solve_spd(mat, dy, m)) return false;
      const auto atdy = adjoint_map(problem, dy);
      dx.clear();
      dz.clear();
      for (std::size_t b = 0; b < nb; ++b) {
        dx.push_back(hermitian_part(h[b] + s.x[b] * atdy[b] * zi[b]));
        dz.push_back(hermitian_part(rd[b] - atdy[b]));
      }
      return true;
    };
    const auto steps = [&](const std::vector<CMatrix>& dx, const std::vector<CMatrix>& dz) {
      double ap = std::numeric_limits<double>::infinity(), ad = ap;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(s.x[b], dx[b]));
        ad = std::min(ad, max_step(s.z[b], dz[b]));
      }
      return std::pair{ap, ad};
    };

    std::vector<CMatrix> dx, dz;
    std::vector<double> dy;
    bool ok = true;
    try {
      std::vector<CMatrix> r0(nb);
      if (!direction(r0, dx, dz, dy)) break;
      auto [ap, ad] = steps(dx, dz);
      ap = std::min(1.0, ap);
      ad = std::min(1.0, ad);
      double mu_aff = 0.0;
      for (std::size_t b = 0; b < nb; ++b)
        mu_aff += re_trace_product(s.x[b] + ap * dx[b], s.z[b] + ad * dz[b]);
      mu_aff /= static_cast<double>(n_total);
      const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

      std::vector<CMatrix> r1;
      for (std::size_t b = 0; b < nb; ++b)
        r1.push_back(CMatrix::identity(s.x[b].rows()) * (sigma * mu) - dx[b] * dz[b]);
      if (!direction(r1, dx, dz, dy)) break;
      std::tie(ap, ad) = steps(dx, dz);
      const double tau = options.step_fraction;
      ap = std::min(1.0, tau * ap);
      ad = std::min(1.0, tau * ad);
      for (std::size_t b = 0; b < nb; ++b) {
        s.x[b] = hermitian_part(s.x[b] + ap * dx[b]);
        s.z[b] = hermitian_part(s.z[b] + ad * dz[b]);
      }
      for (std::size_t k = 0; k < m; ++k) s.y[k] += ad * dy[k];
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) break;
  }
  return s;
}

}  // namespace backflow::sdp
