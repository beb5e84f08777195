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

#include "backflow/channels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/parallel.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

namespace {

std::vector<cplx> vec(const CMatrix& x) {
  std::vector<cplx> v(x.rows() * x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j)
    for (std::size_t i = 0; i < x.rows(); ++i) v[i + j * x.rows()] = x(i, j);
  return v;
}

CMatrix unvec(const std::vector<cplx>& v, std::size_t rows, std::size_t cols) {
  CMatrix x(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) x(i, j) = v[i + j * rows];
  return x;
}

}  // namespace

CMatrix superop_from_kraus(std::span<const CMatrix> kraus) {
  if (kraus.empty()) throw DimensionError("superop_from_kraus: empty Kraus list");
  const std::size_t dout = kraus.front().rows(), din = kraus.front().cols();
  CMatrix s(dout * dout, din * din);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din)
      throw DimensionError("superop_from_kraus: Kraus shapes differ");
    s += kron(k.conj(), k);
  }
  return s;
}

CMatrix choi_from_superop(const CMatrix& superop, std::size_t dim_in, std::size_t dim_out) {
  if (superop.rows() != dim_out * dim_out || superop.cols() != dim_in * dim_in)
    throw DimensionError("choi_from_superop: superoperator shape mismatch");
  CMatrix choi(dim_in * dim_out, dim_in * dim_out);
  for (std::size_t i = 0; i < dim_in; ++i)
    for (std::size_t j = 0; j < dim_in; ++j)
      for (std::size_t a = 0; a < dim_out; ++a)
        for (std::size_t b = 0; b < dim_out; ++b)
          choi(i * dim_out + a, j * dim_out + b) = superop(a + b * dim_out, i + j * dim_in);
  return choi;
}

CMatrix superop_from_choi(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out) {
  if (choi.rows() != dim_in * dim_out || !choi.is_square())
    throw DimensionError("superop_from_choi: Choi shape mismatch");
  CMatrix s(dim_out * dim_out, dim_in * dim_in);
  for (std::size_t i = 0; i < dim_in; ++i)
    for (std::size_t j = 0; j < dim_in; ++j)
      for (std::size_t a = 0; a < dim_out; ++a)
        for (std::size_t b = 0; b < dim_out; ++b)
          s(a + b * dim_out, i + j * dim_in) = choi(i * dim_out + a, j * dim_out + b);
  return s;
}

std::vector<CMatrix> kraus_from_choi(const CMatrix& choi, std::size_t dim_in, std::size_t dim_out,
                                     double cutoff) {
  const auto eig = herm_eig_unchecked(choi);
  std::vector<CMatrix> kraus;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    if (eig.values[k] <= cutoff) continue;
    const double w = std::sqrt(eig.values[k]);
    CMatrix op(dim_out, dim_in);
    for (std::size_t i = 0; i < dim_in; ++i)
      for (std::size_t a = 0; a < dim_out; ++a) op(a, i) = w * eig.vectors(i * dim_out + a, k);
    kraus.push_back(std::move(op));
  }
  if (kraus.empty()) kraus.emplace_back(dim_out, dim_in);
  return kraus;
}

QuantumChannel QuantumChannel::from_kraus(std::vector<CMatrix> kraus) {
  if (kraus.empty()) throw DimensionError("from_kraus: empty Kraus list");
  const std::size_t dout = kraus.front().rows(), din = kraus.front().cols();
  CMatrix sum(din, din);
  for (const auto& k : kraus) {
    if (k.rows() != dout || k.cols() != din) throw DimensionError("from_kraus: Kraus shapes differ");
    sum += k.adjoint() * k;
  }
  const double defect = max_abs_diff(sum, CMatrix::identity(din));
  if (defect > 1e-9)
    throw NonTracePreservingError("from_kraus: sum K^dagger K deviates from I by " +
                                  std::to_string(defect));
  QuantumChannel ch;
  ch.dim_in_ = din;
  ch.dim_out_ = dout;
  ch.superop_ = superop_from_kraus(kraus);
  ch.choi_ = hermitian_part(choi_from_superop(ch.superop_, din, dout));
  ch.kraus_ = std::move(kraus);
  return ch;
}

QuantumChannel QuantumChannel::from_superop(const CMatrix& superop, std::size_t dim_in,
                                            std::size_t dim_out) {
  QuantumChannel ch;
  ch.dim_in_ = dim_in;
  ch.dim_out_ = dim_out;
  ch.superop_ = superop;
  ch.choi_ = hermitian_part(choi_from_superop(superop, dim_in, dim_out));
  if (min_eigenvalue(ch.choi_) >= -kPsdTol)
    ch.kraus_ = kraus_from_choi(ch.choi_, dim_in, dim_out);
  return ch;
}

QuantumChannel QuantumChannel::from_choi(const CMatrix& choi, std::size_t dim_in,
                                         std::size_t dim_out) {
  return from_superop(superop_from_choi(choi, dim_in, dim_out), dim_in, dim_out);
}

QuantumChannel QuantumChannel::identity(std::size_t dim) {
  return from_kraus({CMatrix::identity(dim)});
}

double QuantumChannel::tp_defect() const {
  const std::array<std::size_t, 2> dims{dim_in_, dim_out_};
  const std::array<std::size_t, 1> keep{0};
  return max_abs_diff(partial_trace(choi_, dims, keep), CMatrix::identity(dim_in_));
}

double QuantumChannel::min_choi_eigenvalue() const { return min_eigenvalue(choi_); }

CMatrix QuantumChannel::apply(const CMatrix& x) const {
  if (x.rows() != dim_in_ || x.cols() != dim_in_)
    throw DimensionError("QuantumChannel::apply: input dimension " + std::to_string(x.rows()) +
                         " does not match " + std::to_string(dim_in_));
  if (kraus_) {
    CMatrix out(dim_out_, dim_out_);
    for (const auto& k : *kraus_) out += k * x * k.adjoint();
    return out;
  }
  const auto v = vec(x);
  std::vector<cplx> w(dim_out_ * dim_out_);
  for (std::size_t r = 0; r < w.size(); ++r) {
    cplx s{};
    for (std::size_t c = 0; c < v.size(); ++c) s += superop_(r, c) * v[c];
    w[r] = s;
  }
  return unvec(w, dim_out_, dim_out_);
}

CMatrix QuantumChannel::apply_adjoint(const CMatrix& effect) const {
  if (effect.rows() != dim_out_ || effect.cols() != dim_out_)
    throw DimensionError("apply_adjoint: effect dimension mismatch");
  if (!kraus_) throw Error("apply_adjoint: map has no Kraus representation");
  CMatrix out(dim_in_, dim_in_);
  for (const auto& k : *kraus_) out += k.adjoint() * effect * k;
  return hermitian_part(out);
}

QuantumChannel channel_from_kraus(std::vector<CMatrix> kraus) {
  return QuantumChannel::from_kraus(std::move(kraus));
}

DensityMatrix apply_channel(const QuantumChannel& ch, const DensityMatrix& rho) {
  if (rho.dim() != ch.dim_in())
    throw DimensionError("apply_channel: state dimension " + std::to_string(rho.dim()) +
                         " does not match channel input " + std::to_string(ch.dim_in()));
  return DensityMatrix(ch.apply(rho.matrix()));
}

QuantumChannel tensor_with_identity(const QuantumChannel& ch, std::size_t anc_dim, Side side) {
  if (anc_dim == 0) throw DimensionError("tensor_with_identity: ancilla dimension must be >= 1");
  const CMatrix id = CMatrix::identity(anc_dim);
  if (ch.kraus()) {
    std::vector<CMatrix> lifted;
    for (const auto& k : *ch.kraus()) lifted.push_back(side == Side::kLeft ? kron(id, k) : kron(k, id));
    try {
      return QuantumChannel::from_kraus(std::move(lifted));
    } catch (const NonTracePreservingError&) {
      // Approximately-TP factor (e.g. an intermediate map); fall through.
    }
  }
  const std::size_t din = ch.dim_in(), dout = ch.dim_out();
  const std::size_t big_in = din * anc_dim, big_out = dout * anc_dim;
  CMatrix s(big_out * big_out, big_in * big_in);
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t j = 0; j < din; ++j) {
      const CMatrix img = ch.apply(CMatrix::unit(din, i, j));
      for (std::size_t al = 0; al < anc_dim; ++al)
        for (std::size_t be = 0; be < anc_dim; ++be) {
          const CMatrix anc = CMatrix::unit(anc_dim, al, be);
          const CMatrix out = side == Side::kLeft ? kron(anc, img) : kron(img, anc);
          const std::size_t row_in = side == Side::kLeft ? al * din + i : i * anc_dim + al;
          const std::size_t col_in = side == Side::kLeft ? be * din + j : j * anc_dim + be;
          const auto v = vec(out);
          for (std::size_t r = 0; r < v.size(); ++r) s(r, row_in + col_in * big_in) = v[r];
        }
    }
  return QuantumChannel::from_superop(s, big_in, big_out);
}

QuantumChannel compose(const QuantumChannel& later, const QuantumChannel& earlier) {
  if (later.dim_in() != earlier.dim_out())
    throw DimensionError("compose: dimensions do not chain");
  if (later.kraus() && earlier.kraus() &&
      later.kraus()->size() * earlier.kraus()->size() <= earlier.dim_in() * later.dim_out()) {
    std::vector<CMatrix> kraus;
    for (const auto& kl : *later.kraus())
      for (const auto& ke : *earlier.kraus()) kraus.push_back(kl * ke);
    try {
      return QuantumChannel::from_kraus(std::move(kraus));
    } catch (const NonTracePreservingError&) {
    }
  }
  return QuantumChannel::from_superop(later.superop() * earlier.superop(), earlier.dim_in(),
                                      later.dim_out());
}

QuantumChannel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t n_kraus,
                              Rng& rng) {
  if (n_kraus == 0) throw DimensionError("random_channel: need at least one Kraus operator");
  if (n_kraus * dim_out < dim_in)
    throw DimensionError("random_channel: n_kraus * dim_out must be >= dim_in for a TP map");
  CMatrix g(dim_out * n_kraus, dim_in);
  for (auto& z : g.entries()) z = rng.complex_normal();
  const CMatrix iso = g * psd_inv_sqrt(g.adjoint() * g);
  std::vector<CMatrix> kraus;
  for (std::size_t k = 0; k < n_kraus; ++k) {
    CMatrix op(dim_out, dim_in);
    for (std::size_t a = 0; a < dim_out; ++a)
      for (std::size_t i = 0; i < dim_in; ++i) op(a, i) = iso(k * dim_out + a, i);
    kraus.push_back(std::move(op));
  }
  return QuantumChannel::from_kraus(std::move(kraus));
}

IntermediateMap intermediate_map(const QuantumChannel& early, const QuantumChannel& late,
                                 std::uint64_t sample_seed) {
  if (early.dim_in() != late.dim_in() || early.dim_out() != late.dim_out() ||
      early.dim_in() != early.dim_out())
    throw DimensionError("intermediate_map: channels must share one square dimension");
  const double cond = condition_number(early.superop());
  if (!(cond < kMaxCondition))
    throw NonInvertibleError("intermediate_map: superoperator condition number " +
                                 std::to_string(cond) + " exceeds 1e8",
                             cond);
  const CMatrix v = late.superop() * inverse(early.superop());
  IntermediateMap out{QuantumChannel::from_superop(v, early.dim_out(), late.dim_out())};
  out.min_choi_eig = out.map.min_choi_eigenvalue();
  out.tp_defect = out.map.tp_defect();
  out.inversion_condition = cond;

  Rng rng(sample_seed, 0x5052u);
  for (int s = 0; s < 200 && out.positive_on_samples; ++s) {
    const auto psi = random_pure_vector(out.map.dim_in(), rng);
    const CMatrix img = out.map.apply(CMatrix::outer(psi));
    if (min_eigenvalue(hermitian_part(img)) < -kCpTol) out.positive_on_samples = false;
  }
  return out;
}

std::vector<DivisibilityStep> cp_divisibility_scan(std::span<const double> grid,
                                                   std::span<const QuantumChannel> channels) {
  if (grid.size() != channels.size())
    throw DimensionError("cp_divisibility_scan: grid and channel counts differ");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1]))
      throw DimensionError("cp_divisibility_scan: grid must be strictly increasing");
  std::vector<DivisibilityStep> steps(grid.empty() ? 0 : grid.size() - 1);
  parallel_for(steps.size(), [&](std::size_t k) {
    DivisibilityStep& step = steps[k];
    step.t_early = grid[k];
    step.t_late = grid[k + 1];
    try {
      const auto v = intermediate_map(channels[k], channels[k + 1], k);
      step.min_choi_eig = v.min_choi_eig;
      step.tp_defect = v.tp_defect;
      step.inversion_condition = v.inversion_condition;
      step.positive_on_samples = v.positive_on_samples;
      step.verdict = v.min_choi_eig >= -kCpTol ? CpVerdict::kCp : CpVerdict::kNonCp;
    } catch (const NonInvertibleError& e) {
      step.verdict = CpVerdict::kIndeterminate;
      step.inversion_condition = e.condition();
      step.min_choi_eig = std::nan("");
      step.tp_defect = std::nan("");
    }
  });
  return steps;
}

}  // namespace backflow
