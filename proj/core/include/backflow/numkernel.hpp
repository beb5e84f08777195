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

// Dense complex linear algebra for small (dimension <= ~64) operators.
//
// Storage is row-major. All operations are pure; a CMatrix is a plain value.

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace backflow {

using cplx = std::complex<double>;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  CMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static CMatrix identity(std::size_t n);
  static CMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static CMatrix diagonal(std::span<const double> diag);
  static CMatrix diagonal(std::span<const cplx> diag);
  /// |i><j| in dimension n.
  static CMatrix unit(std::size_t n, std::size_t i, std::size_t j);
  /// |v><v| for a column vector v.
  static CMatrix outer(std::span<const cplx> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  std::span<const cplx> entries() const noexcept { return entries_; }
  std::span<cplx> entries() noexcept { return entries_; }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  CMatrix conj() const;
  cplx trace() const;

  /// Column j as a vector.
  std::vector<cplx> column(std::size_t j) const;
  /// Largest |entry|.
  double max_abs() const noexcept;
  double frobenius_norm() const noexcept;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(cplx s);
  CMatrix& operator*=(double s);

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, double s) { return a *= s; }
  friend CMatrix operator*(double s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  CMatrix operator-() const { return *this * -1.0; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> entries_;
};

/// max |a_ij - b_ij|; throws DimensionError on shape mismatch.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

/// Re Tr(a b) without forming the product.
double re_trace_product(const CMatrix& a, const CMatrix& b);
cplx trace_product(const CMatrix& a, const CMatrix& b);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Partial trace of a square operator on a tensor product with factor
/// dimensions `dims`, keeping the subsystems listed in `keep` (in their
/// original order).
CMatrix partial_trace(const CMatrix& m, std::span<const std::size_t> dims,
                      std::span<const std::size_t> keep);

/// Reorders tensor factors: output factor k is input factor perm[k].
CMatrix permute_subsystems(const CMatrix& m, std::span<const std::size_t> dims,
                           std::span<const std::size_t> perm);

/// max |m - m^dagger|.
double hermiticity_defect(const CMatrix& m);
CMatrix hermitian_part(const CMatrix& m);

struct EigenDecomposition {
  std::vector<double> values;  ///< descending
  CMatrix vectors;             ///< column k pairs with values[k]
};

/// Cyclic Jacobi eigensolver. Requires hermiticity_defect(m) <= kHermTol
/// (scaled by max(1, |m|_max)); the Hermitian part is decomposed.
EigenDecomposition herm_eig(const CMatrix& m);
/// Same as herm_eig but symmetrizes first without checking; for operators
/// that are Hermitian up to accumulated rounding.
EigenDecomposition herm_eig_unchecked(const CMatrix& m);

double min_eigenvalue(const CMatrix& hermitian);
double max_eigenvalue(const CMatrix& hermitian);

/// Sum of singular values.
double trace_norm(const CMatrix& m);
/// Singular values, descending.
std::vector<double> singular_values(const CMatrix& m);
/// Ratio of extreme singular values; +inf for singular input.
double condition_number(const CMatrix& m);

/// V f(D) V^dagger for a Hermitian operator.
template <class F>
CMatrix spectral_apply(const EigenDecomposition& eig, F&& f) {
  const std::size_t n = eig.values.size();
  CMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(eig.values[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx vik = eig.vectors(i, k) * fk;
      if (vik == cplx{}) continue;
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return out;
}

CMatrix psd_sqrt(const CMatrix& m);
/// Moore-Penrose inverse square root; eigenvalues below rel_cutoff * max are
/// treated as zero.
CMatrix psd_inv_sqrt(const CMatrix& m, double rel_cutoff = 1e-12);
/// Orthogonal projector onto the support (same cutoff convention).
CMatrix support_projector(const CMatrix& m, double rel_cutoff = 1e-12);

/// Lower-triangular L with m = L L^dagger; throws InvalidStateError when m is
/// not numerically positive definite.
CMatrix cholesky(const CMatrix& m);
/// Inverse of a Hermitian positive definite matrix via Cholesky.
CMatrix hpd_inverse(const CMatrix& m);
/// Inverse of L^{-1} for lower-triangular L.
CMatrix lower_triangular_inverse(const CMatrix& l);

struct LuDecomposition {
  CMatrix lu;
  std::vector<std::size_t> pivots;
  bool singular = false;
};
LuDecomposition lu_decompose(const CMatrix& m);
CMatrix lu_solve(const LuDecomposition& lu, const CMatrix& rhs);
/// General inverse via partially pivoted LU; throws DimensionError on
/// non-square, NonInvertibleError on exact singularity.
CMatrix inverse(const CMatrix& m);

/// Dense real symmetric positive definite solve (Cholesky), used for
/// interior-point normal equations. `a` is n x n row-major. Falls back to a
/// pivoted LU when Cholesky breaks down. Returns false if both fail.
bool solve_spd(std::vector<double> a, std::vector<double>& rhs, std::size_t n);

}  // namespace backflow
