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

#include <cmath>

#include "backflow/channels.hpp"
#include "backflow/dynamics.hpp"
#include "backflow/errors.hpp"
#include "oracles.hpp"

namespace backflow {
namespace {

std::vector<CMatrix> ad_kraus(double g) {
  return {CMatrix{{1.0, 0.0}, {0.0, g}}, CMatrix{{0.0, std::sqrt(1 - g * g)}, {0.0, 0.0}}};
}

TEST(Channel, RepresentationsAgree) {
  Rng rng(31);
  for (std::size_t din : {2u, 3u})
    for (std::size_t dout : {2u, 4u}) {
      const auto ch = random_channel(din, dout, 3, rng);
      ASSERT_TRUE(ch.kraus().has_value());
      const auto& k = *ch.kraus();
      EXPECT_LE(max_abs_diff(ch.choi(), oracle::choi_from_kraus(k)), 1e-12);
      const auto from_s = QuantumChannel::from_superop(ch.superop(), din, dout);
      const auto from_c = QuantumChannel::from_choi(ch.choi(), din, dout);
      const auto rho = random_state(din, din, rng).matrix();
      const auto ref = oracle::apply_kraus(k, rho);
      EXPECT_LE(max_abs_diff(ch.apply(rho), ref), 1e-12);
      EXPECT_LE(max_abs_diff(from_s.apply(rho), ref), 1e-12);
      EXPECT_LE(max_abs_diff(from_c.apply(rho), ref), 1e-12);
      // Tr_out Choi = I_in
      EXPECT_LE(max_abs_diff(oracle::trace_b(ch.choi(), din, dout), CMatrix::identity(din)), 1e-12);
      EXPECT_LE(ch.tp_defect(), 1e-12);
      EXPECT_GE(ch.min_choi_eigenvalue(), -1e-12);
    }
}

TEST(Channel, AdjointIsDual) {
  Rng rng(32);
  const auto ch = random_channel(3, 2, 4, rng);
  for (int t = 0; t < 5; ++t) {
    const auto rho = random_state(3, 2, rng).matrix();
    const auto a = oracle::random_hermitian(2, rng);
    EXPECT_NEAR((a * ch.apply(rho)).trace().real(), (ch.apply_adjoint(a) * rho).trace().real(), 1e-12);
  }
  // Unital check on the adjoint of a TP map.
  EXPECT_LE(max_abs_diff(ch.apply_adjoint(CMatrix::identity(2)), CMatrix::identity(3)), 1e-12);
}

TEST(Channel, RejectsNonTracePreservingKraus) {
  EXPECT_THROW(QuantumChannel::from_kraus({CMatrix{{1.0, 0.0}, {0.0, 0.5}}}), NonTracePreservingError);
  EXPECT_THROW(QuantumChannel::from_kraus({}), DimensionError);
  Rng rng(30);
  EXPECT_THROW(random_channel(4, 2, 1, rng), DimensionError);
}

TEST(Channel, TensorWithIdentityMatchesKron) {
  Rng rng(33);
  const auto ch = random_channel(2, 2, 2, rng);
  const auto k = *ch.kraus();
  for (Side side : {Side::kLeft, Side::kRight}) {
    const auto lifted = tensor_with_identity(ch, 3, side);
    std::vector<CMatrix> lk;
    for (const auto& op : k)
      lk.push_back(side == Side::kRight ? oracle::kron(op, CMatrix::identity(3))
                                        : oracle::kron(CMatrix::identity(3), op));
    const auto rho = random_state(6, 6, rng).matrix();
    EXPECT_LE(max_abs_diff(lifted.apply(rho), oracle::apply_kraus(lk, rho)), 1e-12);
  }
}

TEST(Channel, TensorWithIdentityOfNonCpMap) {
  // Transpose map: Hermiticity preserving, TP, not CP.
  CMatrix s(4, 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) s(j + i * 2, i + j * 2) = 1.0;
  const auto t = QuantumChannel::from_superop(s, 2, 2);
  EXPECT_FALSE(t.kraus().has_value());
  EXPECT_NEAR(t.min_choi_eigenvalue(), -1.0, 1e-12);
  const auto lifted = tensor_with_identity(t, 2, Side::kRight);
  // Partial transpose of the Bell state has eigenvalue -1/2.
  CMatrix bell(4, 4);
  for (std::size_t a : {0u, 3u})
    for (std::size_t b : {0u, 3u}) bell(a, b) = 0.5;
  EXPECT_NEAR(oracle::min_eig(lifted.apply(bell)), -0.5, 1e-12);
}

TEST(Channel, ComposeMatchesSequentialApplication) {
  Rng rng(34);
  const auto a = random_channel(2, 3, 2, rng);
  const auto b = random_channel(3, 2, 3, rng);
  const auto ba = compose(b, a);
  const auto rho = random_state(2, 2, rng).matrix();
  EXPECT_LE(max_abs_diff(ba.apply(rho), b.apply(a.apply(rho))), 1e-12);
  EXPECT_THROW(compose(a, a), DimensionError);
}

TEST(Channel, IntermediateMapOfAmplitudeDamping) {
  // V between AD(g1) and AD(g2) is AD(g2 / g1); Choi eigenvalues 0, 0, 1 + r^2, 1 - r^2.
  for (auto [g1, g2] : {std::pair{0.8, 0.4}, std::pair{0.4, 0.6}, std::pair{-0.5, 0.3}}) {
    const auto early = QuantumChannel::from_kraus(ad_kraus(g1));
    const auto late = QuantumChannel::from_kraus(ad_kraus(g2));
    const auto im = intermediate_map(early, late, 1);
    const double r = g2 / g1;
    EXPECT_NEAR(im.min_choi_eig, std::min(0.0, 1 - r * r), 1e-12);
    EXPECT_LE(im.tp_defect, 1e-12);
    const auto rho = DensityMatrix::maximally_mixed(2).matrix();
    EXPECT_LE(max_abs_diff(im.map.apply(early.apply(rho)), late.apply(rho)), 1e-12);
    EXPECT_EQ(im.positive_on_samples, std::abs(r) <= 1.0);
  }
}

TEST(Channel, IntermediateMapRefusesSingularEarlyMap) {
  const auto early = QuantumChannel::from_kraus(ad_kraus(0.0));
  const auto late = QuantumChannel::from_kraus(ad_kraus(0.3));
  EXPECT_THROW(intermediate_map(early, late), NonInvertibleError);
  try {
    intermediate_map(early, late);
  } catch (const NonInvertibleError& e) {
    EXPECT_GE(e.condition(), 1e8);
  }
}

TEST(Channel, DivisibilityScanMarksSingularStepIndeterminate) {
  // G(t) = cos t crosses zero at pi/2.
  std::vector<double> grid = {0.0, 1.0, M_PI / 2, 2.0};
  std::vector<QuantumChannel> chans;
  for (double t : grid) chans.push_back(amplitude_damping(std::cos(t)));
  const auto steps = cp_divisibility_scan(grid, chans);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].verdict, CpVerdict::kCp);
  EXPECT_EQ(steps[1].verdict, CpVerdict::kCp);
  EXPECT_EQ(steps[2].verdict, CpVerdict::kIndeterminate);
  EXPECT_TRUE(std::isnan(steps[2].min_choi_eig));
  EXPECT_FALSE(steps[2].cp_flag());
}

}  // namespace
}  // namespace backflow
