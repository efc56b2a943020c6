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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Usage: acceptance [criterion...]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wdro/wdro.hpp"

namespace wdro {
namespace {

using testing::random_problem;
using testing::RandomProblemSpec;
using testing::SupportShape;

// Pinned tolerances and budgets.
constexpr double kC1ValueTol = 1e-6;
constexpr double kC1Budget = 1.0;
constexpr double kC2Tol = 1e-5;
constexpr double kC2Budget = 30.0;
constexpr double kC3Tol = 1e-6;
constexpr double kC3Budget = 60.0;
constexpr double kC4StepFraction = 0.05;
constexpr double kC4Budget = 120.0;
constexpr double kC5OptTol = 1e-4;
constexpr double kC5Budget = 600.0;
constexpr double kC6SaaTol = 1e-3;
constexpr double kC6Budget = 900.0;
constexpr double kC7FeasTol = 1e-6;

struct Result {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SeparatorOptions exact_separator() {
  SeparatorOptions o;
  o.method = SeparationMethod::kExact;
  return o;
}

FlInstance shipped(const std::string& name) {
  return apply_paper_modifications(
      parse_holmberg(read_text_file(std::string(WDRO_DATA_DIR) + "/" + name)));
}

Result criterion1() {
  const Timer t;
  const auto rep = verify_counterexample({0.5, 1.0, 2.0, 3.0, 10.0}, kC1ValueTol);
  const double secs = t.seconds();
  double worst = 0.0;
  for (const auto& r : rep.rows) worst = std::max(worst, std::abs(r.value - r.expected));
  return {rep.all_pass && secs < kC1Budget,
          fmt("5 radii, max |v - min(eps+2, 2eps)| = %.2e, %.3f s", worst, secs)};
}

double max_dual_tx_inf(const TwoStageProblem& p, const Separator& sep, std::span<const double> x) {
  const Matrix t = eval_T(p.uncertainty(), x);
  double best = 0.0;
  for (const auto& pi : sep.dual().vertices())
    best = std::max(best, norm(multiply_transposed(t, pi), Norm::kLInf));
  return best;
}

Result criterion2() {
  const Timer t;
  std::mt19937_64 rng(2024);
  SolveConfig cfg;
  cfg.opt_tol = 1e-8;
  cfg.feas_tol = 1e-9;
  double worst_gap = 0.0, worst_decomp = 0.0, worst_lambda = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 20; ++trial) {
    RandomProblemSpec spec;
    spec.support = SupportShape::kUnbounded;
    spec.k = 1 + static_cast<std::size_t>(trial) % 6;
    spec.samples = 2 + static_cast<std::size_t>(trial) % 3;
    spec.x_dependent_t = trial % 2 == 1;
    spec.epsilon = 0.1 + 0.15 * (trial % 5);
    const auto p = random_problem(rng, spec);
    const auto a = solve_tsdro(p, cfg);
    const auto b = unconstrained_closed_form(p, cfg);
    const Separator sep(p);
    const double lam = max_dual_tx_inf(p, sep, b.x);
    const double decomp =
        dot(p.first_stage().cost, b.x) + p.epsilon() * lam + saa_value(p, b.x);
    worst_gap = std::max(worst_gap, std::abs(a.objective - b.objective));
    worst_decomp = std::max(worst_decomp, std::abs(decomp - b.objective));
    worst_lambda = std::max(worst_lambda, std::abs(lam - b.lambda));
    ok = ok && a.status == SolveStatus::kConverged;
  }
  const double secs = t.seconds();
  ok = ok && worst_gap <= kC2Tol && worst_decomp <= kC2Tol && worst_lambda <= kC2Tol &&
       secs < kC2Budget;
  return {ok, fmt("20 instances, |cut-plane - closed form| <= %.2e, decomposition %.2e, "
                  "lambda %.2e, %.1f s",
                  worst_gap, worst_decomp, worst_lambda, secs)};
}

Result criterion3() {
  const Timer t;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t finite = 0, bad_boundary = 0, bad_coord = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RandomProblemSpec spec;
    spec.k = 1 + static_cast<std::size_t>(trial) % 3;
    spec.samples = 3;
    spec.norm = trial % 2 == 0 ? Norm::kL1 : Norm::kL2;
    spec.x_dependent_t = trial % 3 == 0;
    const auto p = random_problem(rng, spec);
    const Separator sep(p, exact_separator());
    Vector x(p.nx());
    for (auto& v : x) v = u(rng);
    const double lambda = u(rng) * lipschitz_L(p, x, sep.dual());
    const auto& box = p.support();
    for (std::size_t i = 0; i < p.num_samples(); ++i) {
      const auto o = sep.separate(x, lambda, i);
      if (o.kind != OutcomeKind::kFinite) continue;
      ++finite;
      const auto& z = p.ambiguity().samples[i];
      if (max_abs_diff(o.xi, z) > kC3Tol && !box.on_boundary(o.xi, kC3Tol)) ++bad_boundary;
      if (spec.norm == Norm::kL1)
        for (std::size_t j = 0; j < p.k(); ++j)
          if (std::abs(o.xi[j] - box.lower[j]) > kC3Tol &&
              std::abs(o.xi[j] - box.upper[j]) > kC3Tol && std::abs(o.xi[j] - z[j]) > kC3Tol) {
            ++bad_coord;
            break;
          }
    }
  }
  const double secs = t.seconds();
  return {bad_boundary == 0 && bad_coord == 0 && finite > 0 && secs < kC3Budget,
          fmt("100 instances, %zu maximizers, %zu off {zeta_i} u boundary, %zu l1 coordinate "
              "misses, %.1f s",
              finite, bad_boundary, bad_coord, secs)};
}

Result criterion4() {
  const Timer t;
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t checked = 0, bad = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    RandomProblemSpec spec;
    spec.k = 1 + static_cast<std::size_t>(trial) % 2;
    spec.norm = trial % 2 == 0 ? Norm::kL1 : Norm::kL2;
    spec.x_dependent_t = trial % 4 < 2;
    const auto p = random_problem(rng, spec);
    const Separator sep(p, exact_separator());
    Vector x(p.nx());
    for (auto& v : x) v = u(rng);
    const double lip = lipschitz_L(p, x, sep.dual());
    const double lambda = u(rng) * lip;
    const auto& box = p.support();
    double diag = 0.0;
    for (std::size_t j = 0; j < p.k(); ++j)
      diag += (box.upper[j] - box.lower[j]) * (box.upper[j] - box.lower[j]);
    const double step = kC4StepFraction * std::sqrt(diag);
    for (std::size_t i = 0; i < p.num_samples(); ++i) {
      const auto e = sep.separate(x, lambda, i);
      const auto b = separate_bruteforce(p, x, lambda, i, step);
      ++checked;
      const double allowed = 2.0 * step * lip;
      const double diff = e.value - b.value;
      worst_ratio = std::max(worst_ratio, std::abs(diff) / allowed);
      if (e.kind != OutcomeKind::kFinite || diff < -1e-9 || diff > allowed) ++bad;
    }
  }
  const double secs = t.seconds();
  return {bad == 0 && secs < kC4Budget,
          fmt("%zu separations, %zu outside 2*step*L, worst |diff|/(2*step*L) = %.3f, %.1f s",
              checked, bad, worst_ratio, secs)};
}

const std::vector<double> kFlRadii = {0.1, 1.0, 10.0, 100.0};

Result criterion5() {
  const Timer t;
  std::size_t runs = 0, failed = 0;
  double worst_spread = 0.0, worst_gap = 0.0;
  std::string first_failure;
  for (const char* name : {"fl_3x5.txt", "fl_5x10.txt"}) {
    const auto inst = shipped(name);
    for (Norm norm : {Norm::kL1, Norm::kL2})
      for (double eps : kFlRadii) {
        const auto p = build_tsdro(inst, eps, norm, 5, 1);
        double lo = kInf, hi = -kInf;
        for (unsigned mask = 0; mask < 16; ++mask) {
          SolveConfig cfg;
          cfg.opt_tol = kC5OptTol;
          cfg.enhancements = Enhancements::from_mask(mask);
          const auto r = solve_tsdro(p, cfg);
          ++runs;
          const double gap = r.upper_bound - r.lower_bound;
          if (r.status != SolveStatus::kConverged || gap > kC5OptTol) {
            ++failed;
            if (first_failure.empty())
              first_failure = fmt(" first failure %s p=%s eps=%g mask=%u: %s gap %.2e", name,
                                  norm_label(norm).c_str(), eps, mask,
                                  status_name(r.status).c_str(), gap);
          }
          worst_gap = std::max(worst_gap, gap);
          lo = std::min(lo, r.objective);
          hi = std::max(hi, r.objective);
        }
        worst_spread = std::max(worst_spread, hi - lo);
      }
  }
  const double secs = t.seconds();
  return {failed == 0 && worst_spread <= 2.0 * kC5OptTol && secs < kC5Budget,
          fmt("%zu solves, %zu not converged, max gap %.2e, max spread across flags %.2e, "
              "%.1f s",
              runs, failed, worst_gap, worst_spread, secs) +
              first_failure};
}

bool csv_schema_valid(const std::string& csv, std::size_t expected_rows, std::string& why) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != kCsvHeader) {
    why = "header mismatch";
    return false;
  }
  std::size_t rows = 0;
  const std::set<std::string> methods{"TSDRO", "SAA"};
  const std::set<std::string> norms{"1", "2", "inf"};
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12 || !norms.count(f[1]) || !methods.count(f[4])) {
      why = "bad row " + std::to_string(rows);
      return false;
    }
    for (int c : {2, 6, 7, 8}) {
      char* end = nullptr;
      std::strtod(f[c].c_str(), &end);
      if (f[c].empty() || *end != '\0') {
        why = "non-numeric field in row " + std::to_string(rows);
        return false;
      }
    }
    for (int c : {3, 9, 10, 11})
      if (f[c].empty() || f[c].find_first_not_of("0123456789") != std::string::npos) {
        why = "non-integer field in row " + std::to_string(rows);
        return false;
      }
    if (f[5] == "Converged" && f[4] == "TSDRO" && (f[7] == "nan" || f[7] == "inf")) {
      why = "non-finite estimate on a converged run";
      return false;
    }
  }
  if (rows != expected_rows) {
    why = "row count " + std::to_string(rows);
    return false;
  }
  return true;
}

Result criterion6() {
  const Timer t;
  const auto inst = shipped("fl_5x10.txt");
  SweepConfig cfg;
  cfg.epsilons = kFlRadii;
  cfg.simulations = 10;
  cfg.solve.opt_tol = kC5OptTol;
  const auto recs = run_sweep(inst, "fl_5x10", cfg);
  std::ostringstream csv;
  write_csv(csv, recs);
  std::string why;
  const bool schema = csv_schema_valid(csv.str(), 10 * 4 * 2 * 2, why);

  // Per (norm, seed): TSDRO objective nondecreasing in ε; SAA rows identical.
  std::map<std::pair<int, std::uint64_t>, std::vector<double>> path;
  std::map<std::uint64_t, std::set<std::pair<double, double>>> saa;
  std::size_t not_converged = 0;
  for (const auto& r : recs) {
    if (r.method == "TSDRO") {
      path[{static_cast<int>(r.norm), r.seed}].push_back(r.objective);
      if (r.status != "Converged") ++not_converged;
    } else {
      saa[r.seed].insert({r.objective, r.oos_estimate});
    }
  }
  std::size_t decreases = 0;
  for (const auto& [key, v] : path)
    for (std::size_t k = 1; k < v.size(); ++k)
      if (v[k] < v[k - 1] - 2.0 * kC5OptTol) ++decreases;
  bool saa_invariant = saa.size() == 10;
  for (const auto& [seed, set] : saa) saa_invariant = saa_invariant && set.size() == 1;
  const double sweep_secs = t.seconds();

  double worst_limit = 0.0;
  for (const char* name : {"fl_3x5.txt", "fl_5x10.txt"}) {
    const auto fl = shipped(name);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto samples = sample_demands(fl, 5, seed);
      const double v = solve_tsdro(build_tsdro(fl, 1e-6, Norm::kL1, samples)).objective;
      worst_limit = std::max(worst_limit, std::abs(v - saa_solve(fl, samples).value));
    }
  }
  const bool ok = schema && decreases == 0 && saa_invariant && not_converged == 0 &&
                  worst_limit <= kC6SaaTol && sweep_secs < kC6Budget;
  return {ok, fmt("sweep %zu records in %.1f s, schema %s, %zu decreases in eps, SAA "
                  "eps-invariant %s, %zu not converged, |v(1e-6) - SAA| <= %.2e",
                  recs.size(), sweep_secs, schema ? "ok" : why.c_str(), decreases,
                  saa_invariant ? "yes" : "no", not_converged, worst_limit)};
}

Result criterion7() {
  const Timer t;
  std::size_t runs = 0, points = 0, interior = 0, structure = 0, by_boundary = 0;
  for (const char* name : {"fl_3x5.txt", "fl_5x10.txt"}) {
    const auto inst = shipped(name);
    for (Norm norm : {Norm::kL1, Norm::kL2})
      for (double eps : kFlRadii)
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          const auto p = build_tsdro(inst, eps, norm, 5, seed);
          const auto r = solve_tsdro(p);
          if (r.status != SolveStatus::kConverged) continue;
          ++runs;
          for (const auto& c : extremal_support(p, r, kC7FeasTol)) {
            if (c.kind == SupportClass::kAtSample) continue;
            ++points;
            if (c.kind == SupportClass::kInterior) ++interior;
            else ++by_boundary;
            if (norm == Norm::kL1 && !c.candidate_structure) ++structure;
          }
        }
  }
  return {interior == 0 && structure == 0 && runs > 0,
          fmt("%zu converged runs, %zu non-sample support points (%zu on boundary), %zu "
              "interior, %zu l1 coordinate misses, %.1f s",
              runs, points, by_boundary, interior, structure, t.seconds())};
}

}  // namespace
}  // namespace wdro

int main(int argc, char** argv) {
  using namespace wdro;
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"counterexample exactness", criterion1},
      {"unbounded-support closed form", criterion2},
      {"boundary optimality of maximizers", criterion3},
      {"exact vs brute-force separation", criterion4},
      {"facility-location convergence under all flags", criterion5},
      {"radius monotonicity, SAA limit and sweep", criterion6},
      {"extremal-support classification", criterion7},
  };
  std::set<int> only;
  for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && !only.count(id)) continue;
    Result r;
    try {
      r = criteria[k].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    all = all && r.pass;
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", id, criteria[k].first,
                r.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
