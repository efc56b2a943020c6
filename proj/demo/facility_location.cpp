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

// Worst-case facility location on a shipped instance: solve one radius under
// both ground norms and list the extremal support of the l1 solution.

#include <cstdio>
#include <string>

#include "wdro/wdro.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : WDRO_DATA_DIR "/fl_3x5.txt";
  const double eps = argc > 2 ? std::stod(argv[2]) : 5.0;
  const auto inst = wdro::apply_paper_modifications(
      wdro::parse_holmberg(wdro::read_text_file(path)));
  const auto train = wdro::sample_demands(inst, 5, 1);
  const auto test = wdro::sample_demands(inst, 2000, 2);

  const auto saa = wdro::saa_solve(inst, train);
  const auto p_saa = wdro::build_tsdro(inst, eps, wdro::Norm::kL1, train);
  std::printf("SAA      objective %10.3f  out-of-sample %10.3f\n", saa.value,
              wdro::out_of_sample(p_saa, saa.x, test));

  for (wdro::Norm norm : {wdro::Norm::kL1, wdro::Norm::kL2}) {
    const auto p = wdro::build_tsdro(inst, eps, norm, train);
    const auto r = wdro::solve_tsdro(p);
    std::printf("TSDRO l%s objective %10.3f  out-of-sample %10.3f  %s, %zu iterations\n",
                wdro::norm_label(norm).c_str(), r.objective, wdro::out_of_sample(p, r.x, test),
                wdro::status_name(r.status).c_str(), r.iterations);
    if (norm != wdro::Norm::kL1) continue;
    for (const auto& s : wdro::extremal_support(p, r)) {
      std::printf("  weight %.4f  %-10s  xi =", s.weight, wdro::support_class_name(s.kind).c_str());
      for (double v : s.xi) std::printf(" %.2f", v);
      std::printf("\n");
    }
  }
}
