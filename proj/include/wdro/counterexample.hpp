// Copyright 2026 The wdro Authors
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

// The two-dimensional instance on which v = min{ε + 2, 2ε} while the
// conic-support formula Kε + v_SAA predicts ε:
//
//   Z(ξ) = max_{π ∈ Π} πᵀ(ξ - 1),  Π = {π : -2 <= π_1 = π_2 <= 1},
//   Ξ = R²₊, one sample ζ = (1, 1), l1 transport cost.
//
// Π is written as the dual of a recourse with two "=" rows and six columns:
// y1, y2 bound π_1 to [-2, 1], y3, y4 do the same for π_2, and y5, y6 force
// π_1 = π_2. The first stage is a single variable fixed at 0.

#pragma once

#include "wdro/model.hpp"

namespace wdro {

inline TwoStageProblem counterexample_problem(double epsilon,
                                              BoxSupport support = {{0.0, 0.0}, {kInf, kInf}}) {
  FirstStage f;
  f.cost = {0.0};
  f.a = Matrix(0, 1);
  f.lower = {0.0};
  f.upper = {0.0};

  SecondStage s;
  s.cost = {2.0, 1.0, 2.0, 1.0, 0.0, 0.0};
  s.w = Matrix::from_rows({{-1.0, 1.0, 0.0, 0.0, 1.0, -1.0},
                           {0.0, 0.0, -1.0, 1.0, -1.0, 1.0}});
  s.row_types = {RecourseRow::kEqual, RecourseRow::kEqual};

  UncertaintyAffineMap map;
  map.h0 = {-1.0, -1.0};
  map.h = Matrix(2, 1);
  map.t0 = Matrix::identity(2);

  AmbiguitySet amb;
  amb.samples = {{1.0, 1.0}};
  amb.epsilon = epsilon;
  amb.norm = Norm::kL1;
  return TwoStageProblem(std::move(f), std::move(s), std::move(map), std::move(support),
                         std::move(amb));
}

}  // namespace wdro
