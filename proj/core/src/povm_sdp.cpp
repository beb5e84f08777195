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

#include "povm_sdp.hpp"

#include <cstdint>

#include "backflow/errors.hpp"
#include "backflow/sdp.hpp"

namespace backflow::detail {

PovmSdpOutput solve_povm_sdp(std::span<const CMatrix> gains, const CMatrix* marginal,
                             std::span<const double> probs, double tol, int max_iter) {
  const std::size_t n = gains.size();
  if (n == 0) throw DimensionError("solve_povm_sdp: no outcomes");
  const std::size_t d = gains.front().rows();
  sdp::Problem problem;
  std::vector<std::uint32_t> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    problem.cost.push_back(-hermitian_part(gains[i]));
    blocks.push_back(static_cast<std::uint32_t>(i));
  }
  sdp::add_identity_sum(problem, d, blocks);
  std::vector<std::size_t> prob_rows;
  if (marginal != nullptr) {
    if (probs.size() != n) throw DimensionError("solve_povm_sdp: probability count mismatch");
    // The last outcome's constraint follows from the others and sum P = I.
    for (std::size_t i = 0; i + 1 < n; ++i)
      prob_rows.push_back(sdp::add_trace_constraint(problem, *marginal,
                                                    static_cast<std::uint32_t>(i), probs[i]));
  }

  sdp::Options opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const auto sol = sdp::solve(problem, opts);

  PovmSdpOutput out;
  out.effects = sol.x;
  out.iterations = sol.iterations;
  out.converged = sol.converged;
  out.y = CMatrix(d, d);
  for (std::size_t k = 0; k < d * d; ++k)
    if (sol.y[k] != 0.0) out.y -= sol.y[k] * sdp::hermitian_basis_element(d, k);
  if (marginal != nullptr) {
    out.mu.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) out.mu[i] = -sol.y[prob_rows[i]];
  }
  return out;
}

}  // namespace backflow::detail
