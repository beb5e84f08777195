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

// Independent reference computations for the test suites. Linear algebra here
// goes through Eigen so that it shares no code with the library kernels.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "backflow/numkernel.hpp"
#include "backflow/quantum.hpp"
#include "backflow/rng.hpp"

namespace backflow::oracle {

inline Eigen::MatrixXcd to_eigen(const CMatrix& m) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline CMatrix from_eigen(const Eigen::MatrixXcd& e) {
  CMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

/// Ascending eigenvalues of the Hermitian part.
inline std::vector<double> eigenvalues(const CMatrix& m) {
  Eigen::MatrixXcd e = to_eigen(m);
  Eigen::MatrixXcd h = 0.5 * (e + e.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return v;
}

inline double min_eig(const CMatrix& m) { return eigenvalues(m).front(); }

inline double trace_norm(const CMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
  return svd.singularValues().sum();
}

/// 1/2 (1 + |p1 rho1 - p2 rho2|_1).
inline double helstrom(double p1, const CMatrix& r1, double p2, const CMatrix& r2) {
  return 0.5 * (1.0 + oracle::trace_norm(r1 * p1 - r2 * p2));
}

/// Naive Kronecker product by index arithmetic.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j)
      k(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return k;
}

/// Tr_B of an operator on A (x) B.
inline CMatrix trace_b(const CMatrix& m, std::size_t da, std::size_t db) {
  CMatrix r(da, da);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j)
      for (std::size_t k = 0; k < db; ++k) r(i, j) += m(i * db + k, j * db + k);
  return r;
}

/// Tr_A of an operator on A (x) B.
inline CMatrix trace_a(const CMatrix& m, std::size_t da, std::size_t db) {
  CMatrix r(db, db);
  for (std::size_t i = 0; i < db; ++i)
    for (std::size_t j = 0; j < db; ++j)
      for (std::size_t k = 0; k < da; ++k) r(i, j) += m(k * db + i, k * db + j);
  return r;
}

/// sum_k K rho K^dagger.
inline CMatrix apply_kraus(const std::vector<CMatrix>& kraus, const CMatrix& rho) {
  CMatrix out(kraus.front().rows(), kraus.front().rows());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

/// Unnormalized Choi sum_ij |i><j| (x) Lambda(|i><j|) from Kraus operators.
inline CMatrix choi_from_kraus(const std::vector<CMatrix>& kraus) {
  const std::size_t din = kraus.front().cols();
  const std::size_t dout = kraus.front().rows();
  CMatrix c(din * dout, din * dout);
  for (std::size_t i = 0; i < din; ++i)
    for (std::size_t j = 0; j < din; ++j) {
      const auto block = apply_kraus(kraus, CMatrix::unit(din, i, j));
      for (std::size_t a = 0; a < dout; ++a)
        for (std::size_t b = 0; b < dout; ++b) c(i * dout + a, j * dout + b) = block(a, b);
    }
  return c;
}

inline CMatrix random_hermitian(std::size_t d, Rng& rng) {
  CMatrix g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  return (g + g.adjoint()) * 0.5;
}

/// Pauli-channel weights (p0, px, py, pz) from Pauli eigenvalues.
inline std::array<double, 4> pauli_weights(double l1, double l2, double l3) {
  return {(1 + l1 + l2 + l3) / 4, (1 + l1 - l2 - l3) / 4, (1 - l1 + l2 - l3) / 4,
          (1 - l1 - l2 + l3) / 4};
}

/// Scan over symmetric qubit POVMs: n effects (2/n)|phi_k><phi_k| with
/// Bloch vectors in the x-z plane at theta + 2 pi k / n, every theta on a
/// grid and every cyclic relabeling.
inline double brute_force_xz_plane(const std::vector<double>& probs,
                                     const std::vector<CMatrix>& states, int samples = 20000) {
  const std::size_t n = probs.size();
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double theta = 2.0 * M_PI * s / samples;
    for (int shift = 0; shift < static_cast<int>(n); ++shift) {
      double pg = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double a = theta + 2.0 * M_PI * static_cast<double>((k + shift) % n) / n;
        CMatrix e{{0.5 * (1 + std::cos(a)), 0.5 * std::sin(a)},
                  {0.5 * std::sin(a), 0.5 * (1 - std::cos(a))}};
        e *= 2.0 / static_cast<double>(n);
        pg += probs[k] * (states[k] * e).trace().real();
      }
      best = std::max(best, pg);
    }
  }
  return best;
}

}  // namespace backflow::oracle
