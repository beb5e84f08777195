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

#pragma once

namespace backflow {

/// Entrywise tolerance for Hermiticity checks.
inline constexpr double kHermTol = 1e-12;
/// Smallest eigenvalue accepted as "positive semidefinite".
inline constexpr double kPsdTol = 1e-9;
/// Choi-eigenvalue threshold for CP verdicts on intermediate maps. Looser
/// than kPsdTol because those maps carry inversion noise.
inline constexpr double kCpTol = 1e-7;
/// Default certified duality gap for every SDP solve.
inline constexpr double kDefaultGapTol = 1e-7;
/// Significance threshold for correlation differences (3 x gap tolerance).
inline constexpr double kCorrelationTol = 3e-7;
/// Superoperators with a larger 2-norm condition number are not inverted.
inline constexpr double kMaxCondition = 1e8;
/// Outcomes below this probability are flagged as negligible.
inline constexpr double kNegligibleProbability = 1e-12;

}  // namespace backflow
