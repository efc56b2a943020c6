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

// Solves the two-dimensional counterexample for a few radii and prints the
// worst-case value next to the value a candidate-point restriction would give.

#include <cstdio>

#include "wdro/wdro.hpp"

int main() {
  const auto rep = wdro::verify_counterexample({0.5, 1.0, 2.0, 3.0, 10.0});
  std::printf("%8s %12s %12s %12s %8s\n", "epsilon", "value", "expected", "restricted", "lambda");
  for (const auto& r : rep.rows)
    std::printf("%8g %12.6f %12.6f %12.6f %8.4f\n", r.epsilon, r.value, r.expected, r.refuted,
                r.lambda);
  return rep.all_pass ? 0 : 1;
}
