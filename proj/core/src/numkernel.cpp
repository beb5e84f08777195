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

#include "backflow/numkernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "backflow/errors.hpp"
#include "backflow/tolerances.hpp"

namespace backflow {

namespace {

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

void require_square(const CMatrix& m, const char* op) {
  if (!m.is_square()) throw DimensionError(std::string(op) + ": matrix is not square");
}

std::size_t product_of(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw DimensionError("CMatrix: entry count " + std::to_string(entries_.size()) +
                         " does not match " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> diag) {
  CMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

CMatrix CMatrix::diagonal(std::span<const cplx> diag) {
  CMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

CMatrix CMatrix::unit(std::size_t n, std::size_t i, std::size_t j) {
  CMatrix m(n, n);
  m(i, j) = 1.0;
  return m;
}

CMatrix CMatrix::outer(std::span<const cplx> v) {
  CMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  return out;
}

CMatrix CMatrix::conj() const {
  CMatrix out = *this;
  for (auto& z : out.entries_) z = std::conj(z);
  return out;
}

cplx CMatrix::trace() const {
  require_square(*this, "trace");
  cplx t{};
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

std::vector<cplx> CMatrix::column(std::size_t j) const {
  std::vector<cplx> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

double CMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& z : entries_) m = std::max(m, std::abs(z));
  return m;
}

double CMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (const auto& z : entries_) s += std::norm(z);
  return std::sqrt(s);
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= other.entries_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& z : entries_) z *= s;
  return *this;
}

CMatrix& CMatrix::operator*=(double s) {
  for (auto& z : entries_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("operator*: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  }
  CMatrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const cplx ail = a(i, l);
      if (ail == cplx{}) continue;
      for (std::size_t j = 0; j < m; ++j) out(i, j) += ail * b(l, j);
    }
  }
  return out;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t k = 0; k < a.entries().size(); ++k)
    m = std::max(m, std::abs(a.entries()[k] - b.entries()[k]));
  return m;
}

cplx trace_product(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols())
    throw DimensionError("trace_product: incompatible shapes");
  cplx t{};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t += a(i, j) * b(j, i);
  return t;
}

double re_trace_product(const CMatrix& a, const CMatrix& b) { return trace_product(a, b).real(); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const cplx aij = a(i, j);
      if (aij == cplx{}) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

CMatrix permute_subsystems(const CMatrix& m, std::span<const std::size_t> dims,
                           std::span<const std::size_t> perm) {
  require_square(m, "permute_subsystems");
  const std::size_t n = dims.size();
  if (perm.size() != n) throw DimensionError("permute_subsystems: permutation length mismatch");
  if (product_of(dims) != m.rows())
    throw DimensionError("permute_subsystems: product of dims does not match matrix dimension");
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw DimensionError("permute_subsystems: invalid permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> new_dims(n);
  for (std::size_t k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];

  // Map each old flat index to the new flat index.
  const std::size_t total = m.rows();
  std::vector<std::size_t> map(total);
  std::vector<std::size_t> digits(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = n; k-- > 0;) {
      digits[k] = rem % dims[k];
      rem /= dims[k];
    }
    std::size_t out = 0;
    for (std::size_t k = 0; k < n; ++k) out = out * new_dims[k] + digits[perm[k]];
    map[idx] = out;
  }
  CMatrix out(total, total);
  for (std::size_t i = 0; i < total; ++i)
    for (std::size_t j = 0; j < total; ++j) out(map[i], map[j]) = m(i, j);
  return out;
}

CMatrix partial_trace(const CMatrix& m, std::span<const std::size_t> dims,
                      std::span<const std::size_t> keep) {
  require_square(m, "partial_trace");
  const std::size_t n = dims.size();
  if (product_of(dims) != m.rows())
    throw DimensionError("partial_trace: product of dims (" + std::to_string(product_of(dims)) +
                         ") does not match matrix dimension " + std::to_string(m.rows()));
  std::vector<bool> kept(n, false);
  for (auto k : keep) {
    if (k >= n || kept[k]) throw DimensionError("partial_trace: invalid keep index");
    kept[k] = true;
  }
  // Bring kept factors to the front, then trace out the contiguous tail.
  std::vector<std::size_t> perm;
  for (std::size_t k = 0; k < n; ++k)
    if (kept[k]) perm.push_back(k);
  std::size_t keep_dim = 1;
  for (auto k : perm) keep_dim *= dims[k];
  for (std::size_t k = 0; k < n; ++k)
    if (!kept[k]) perm.push_back(k);
  const bool identity_perm = std::is_sorted(perm.begin(), perm.end());
  const CMatrix reordered = identity_perm ? m : permute_subsystems(m, dims, perm);
  const std::size_t trace_dim = m.rows() / keep_dim;
  CMatrix out(keep_dim, keep_dim);
  for (std::size_t i = 0; i < keep_dim; ++i)
    for (std::size_t j = 0; j < keep_dim; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < trace_dim; ++k)
        s += reordered(i * trace_dim + k, j * trace_dim + k);
      out(i, j) = s;
    }
  return out;
}

double hermiticity_defect(const CMatrix& m) {
  require_square(m, "hermiticity_defect");
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j)
      d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
  return d;
}

CMatrix hermitian_part(const CMatrix& m) {
  require_square(m, "hermitian_part");
  CMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return out;
}

EigenDecomposition herm_eig_unchecked(const CMatrix& input) {
  require_square(input, "herm_eig");
  const std::size_t n = input.rows();
  CMatrix a = hermitian_part(input);
  CMatrix v = CMatrix::identity(n);

  const double fro = a.frobenius_norm();
  const double target = 1e-15 * fro;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    off = std::sqrt(2.0 * off);
    if (off <= target || off == 0.0) break;

    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Skip rotations that cannot change the diagonal in floating point.
        const double g = 100.0 * mag;
        if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const cplx phase = apq / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cplx pc = std::conj(phase);
        // Columns: A <- A U with U = [[c, s], [-s conj(e), c conj(e)]].
        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * pc * akq;
          a(k, q) = s * akp + c * pc * akq;
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * pc * vkq;
          v(k, q) = s * vkp + c * pc * vkq;
        }
        // Rows: A <- U^dagger A.
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * apk + c * phase * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
      }
    }
    if (!rotated) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

EigenDecomposition herm_eig(const CMatrix& m) {
  require_square(m, "herm_eig");
  const double defect = hermiticity_defect(m);
  if (defect > kHermTol * std::max(1.0, m.max_abs())) {
    throw NonHermitianError("herm_eig: Hermiticity defect " + std::to_string(defect) +
                            " exceeds tolerance");
  }
  return herm_eig_unchecked(m);
}

double min_eigenvalue(const CMatrix& hermitian) {
  if (hermitian.rows() == 0) return 0.0;
  return herm_eig_unchecked(hermitian).values.back();
}

double max_eigenvalue(const CMatrix& hermitian) {
  if (hermitian.rows() == 0) return 0.0;
  return herm_eig_unchecked(hermitian).values.front();
}

std::vector<double> singular_values(const CMatrix& m) {
  // Eigenvalues of the smaller Gram matrix; fine for the small, modestly
  // conditioned operators used here.
  const CMatrix gram = m.rows() >= m.cols() ? m.adjoint() * m : m * m.adjoint();
  auto eig = herm_eig_unchecked(gram);
  std::vector<double> s(eig.values.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::sqrt(std::max(0.0, eig.values[k]));
  return s;
}

double trace_norm(const CMatrix& m) {
  require_square(m, "trace_norm");
  if (hermiticity_defect(m) <= kHermTol * std::max(1.0, m.max_abs())) {
    double s = 0.0;
    for (double v : herm_eig_unchecked(m).values) s += std::abs(v);
    return s;
  }
  double s = 0.0;
  for (double v : singular_values(m)) s += v;
  return s;
}

double condition_number(const CMatrix& m) {
  require_square(m, "condition_number");
  const auto s = singular_values(m);
  if (s.empty()) return 1.0;
  if (s.back() <= 0.0) return std::numeric_limits<double>::infinity();
  return s.front() / s.back();
}

CMatrix psd_sqrt(const CMatrix& m) {
  return spectral_apply(herm_eig_unchecked(m),
                        [](double x) { return x > 0.0 ? std::sqrt(x) : 0.0; });
}

CMatrix psd_inv_sqrt(const CMatrix& m, double rel_cutoff) {
  const auto eig = herm_eig_unchecked(m);
  const double cutoff = rel_cutoff * std::max(eig.values.empty() ? 0.0 : eig.values.front(), 0.0);
  return spectral_apply(eig, [cutoff](double x) { return x > cutoff ? 1.0 / std::sqrt(x) : 0.0; });
}

CMatrix support_projector(const CMatrix& m, double rel_cutoff) {
  const auto eig = herm_eig_unchecked(m);
  const double cutoff = rel_cutoff * std::max(eig.values.empty() ? 0.0 : eig.values.front(), 0.0);
  return spectral_apply(eig, [cutoff](double x) { return x > cutoff ? 1.0 : 0.0; });
}

CMatrix cholesky(const CMatrix& m) {
  require_square(m, "cholesky");
  const std::size_t n = m.rows();
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0)) throw InvalidStateError("cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

CMatrix lower_triangular_inverse(const CMatrix& l) {
  require_square(l, "lower_triangular_inverse");
  const std::size_t n = l.rows();
  CMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    inv(j, j) = 1.0 / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s{};
      for (std::size_t k = j; k < i; ++k) s += l(i, k) * inv(k, j);
      inv(i, j) = -s / l(i, i);
    }
  }
  return inv;
}

CMatrix hpd_inverse(const CMatrix& m) {
  const CMatrix linv = lower_triangular_inverse(cholesky(m));
  return hermitian_part(linv.adjoint() * linv);
}

LuDecomposition lu_decompose(const CMatrix& m) {
  require_square(m, "lu_decompose");
  const std::size_t n = m.rows();
  LuDecomposition out{m, std::vector<std::size_t>(n), false};
  CMatrix& a = out.lu;
  std::iota(out.pivots.begin(), out.pivots.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        piv = i;
      }
    if (best == 0.0) {
      out.singular = true;
      continue;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(out.pivots[k], out.pivots[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      const cplx f = a(i, k);
      if (f == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return out;
}

CMatrix lu_solve(const LuDecomposition& lu, const CMatrix& rhs) {
  const std::size_t n = lu.lu.rows();
  if (rhs.rows() != n) throw DimensionError("lu_solve: rhs row count mismatch");
  if (lu.singular) throw NonInvertibleError("lu_solve: matrix is singular",
                                            std::numeric_limits<double>::infinity());
  CMatrix x(n, rhs.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < rhs.cols(); ++j) x(i, j) = rhs(lu.pivots[i], j);
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x(i, c) -= lu.lu(i, k) * x(k, c);
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) x(i, c) -= lu.lu(i, k) * x(k, c);
      x(i, c) /= lu.lu(i, i);
    }
  }
  return x;
}

CMatrix inverse(const CMatrix& m) {
  require_square(m, "inverse");
  return lu_solve(lu_decompose(m), CMatrix::identity(m.rows()));
}

bool solve_spd(std::vector<double> a, std::vector<double>& rhs, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  bool ok = true;
  for (std::size_t j = 0; j < n && ok; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0)) {
      ok = false;
      break;
    }
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  if (ok) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * rhs[k];
      rhs[i] = s / l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = rhs[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * rhs[k];
      rhs[i] = s / l[i * n + i];
    }
    return true;
  }
  // Partially pivoted Gaussian elimination.
  std::vector<double> b = rhs;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[piv * n + k])) piv = i;
    if (a[piv * n + k] == 0.0) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[piv * n + j]);
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i * n + k] / a[k * n + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * b[j];
    b[i] = s / a[i * n + i];
  }
  rhs = std::move(b);
  return true;
}

}  // namespace backflow
