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

// Internal: POVM-valued linear SDPs shared by discrimination and the
// correlation seesaw.
//
//   maximize sum_i Re Tr(G_i P_i)
//   s.t.     P_i >= 0, sum_i P_i = I, [Tr(rho P_i) = p_i for all i]
//
// Dual: minimize Tr Y + sum_i mu_i p_i s.t. Y + mu_i rho >= G_i.

#pragma once

#include <span>
#include <vector>

#include "backflow/numkernel.hpp"

namespace backflow::detail {

struct PovmSdpOutput {
  std::vector<CMatrix> effects;  ///< raw interior-point iterate
  CMatrix y;
  std::vector<double> mu;  ///< empty without probability constraints
  int iterations = 0;
  bool converged = false;
};

/// marginal == nullptr drops the probability constraints.
PovmSdpOutput solve_povm_sdp(std::span<const CMatrix> gains, const CMatrix* marginal,
                             std::span<const double> probs, double tol, int max_iter);

}  // namespace backflow::detail
