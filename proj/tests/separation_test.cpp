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

#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wdro/counterexample.hpp"
#include "wdro/separation.hpp"

namespace wdro {
namespace {

using testing::random_problem;
using testing::RandomProblemSpec;
using testing::SupportShape;

const BoxSupport kPlane{{-kInf, -kInf}, {kInf, kInf}};

// max over a fine grid of d ∈ [lo, hi] of aᵀd - λ‖d‖_p (k <= 2).
double grid_inner(const Vector& a, const Vector& lo, const Vector& hi, double lambda, Norm p,
                  int steps) {
  double best = -kInf;
  Vector d(a.size());
  const int n1 = a.size() > 1 ? steps : 0;
  for (int s0 = 0; s0 <= steps; ++s0)
    for (int s1 = 0; s1 <= n1; ++s1) {
      d[0] = lo[0] + (hi[0] - lo[0]) * s0 / steps;
      if (a.size() > 1) d[1] = lo[1] + (hi[1] - lo[1]) * s1 / steps;
      best = std::max(best, dot(a, d) - lambda * norm(d, p));
    }
  return best;
}

TEST(InnerMax, ClosedFormsBeatFineGrid) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.0, 2.0), lam(0.05, 2.5);
  for (Norm p : {Norm::kL1, Norm::kL2, Norm::kLInf})
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t k = 1 + trial % 2;
      Vector a(k), lo(k), hi(k);
      for (std::size_t j = 0; j < k; ++j) {
        a[j] = u(rng);
        lo[j] = trial % 7 == 0 ? 0.0 : -w(rng);
        hi[j] = trial % 5 == 0 ? 0.0 : w(rng);
      }
      const double lambda = lam(rng);
      const auto r = detail::inner_max(a, lo, hi, lambda, p, 1e-9);
      ASSERT_FALSE(r.unbounded);
      for (std::size_t j = 0; j < k; ++j) {
        EXPECT_GE(r.d[j], lo[j]);
        EXPECT_LE(r.d[j], hi[j]);
      }
      EXPECT_NEAR(r.gain, dot(a, r.d) - lambda * norm(r.d, p), 1e-12);
      const int steps = 400;
      const double g = grid_inner(a, lo, hi, lambda, p, steps);
      EXPECT_GE(r.gain, g - 1e-9) << "norm " << norm_name(p) << " trial " << trial;
      // A grid point lies within 4/steps (l∞) of the optimum; slope is bounded.
      const double lip = norm(a, Norm::kL1) + lambda * 2.0;
      EXPECT_LE(r.gain, g + lip * 4.0 / steps) << "norm " << norm_name(p) << " trial " << trial;
    }
}

TEST(InnerMax, UnboundedWhenClippedDualNormExceedsLambda) {
  const Vector lo = {0.0, -1.0}, hi = {kInf, 1.0};
  const auto r = detail::inner_max(Vector{1.5, 3.0}, lo, hi, 1.0, Norm::kL2, 1e-9);
  EXPECT_TRUE(r.unbounded);
  EXPECT_NEAR(r.ray[0], 1.0, 1e-12);
  EXPECT_NEAR(r.ray[1], 0.0, 1e-12);
  EXPECT_FALSE(detail::inner_max(Vector{-1.5, 3.0}, lo, hi, 1.0, Norm::kL2, 1e-9).unbounded);
  const Vector flo = {-kInf, -kInf}, fhi = {kInf, kInf};
  const auto l1 = detail::inner_max(Vector{0.6, -0.7}, flo, fhi, 1.0, Norm::kLInf, 1e-9);
  EXPECT_TRUE(l1.unbounded);
  EXPECT_NEAR(l1.slope, 1.3, 1e-12);
}

TEST(ExactL1, CounterexampleFiniteAtOrigin) {
  const auto p = counterexample_problem(1.0);
  const auto out = separate_exact_l1(p, Vector{0.0}, 1.0, 0);
  ASSERT_EQ(out.kind, OutcomeKind::kFinite);
  EXPECT_NEAR(out.value, 2.0, 1e-9);
  EXPECT_NEAR(out.xi[0], 0.0, 1e-12);
  EXPECT_NEAR(out.xi[1], 0.0, 1e-12);
  EXPECT_NEAR(out.pi.pi[0], -2.0, 1e-9);
}

TEST(ExactL1, CounterexampleUnboundedBelowOne) {
  const auto p = counterexample_problem(1.0);
  const auto out = separate_exact_l1(p, Vector{0.0}, 0.5, 0);
  ASSERT_EQ(out.kind, OutcomeKind::kUnbounded);
  EXPECT_NEAR(norm(out.ray, Norm::kL1), 1.0, 1e-12);
  EXPECT_GT(out.ray_slope, 0.5);
  EXPECT_NEAR(out.pi.pi[0], 1.0, 1e-9);
  for (double v : out.ray) EXPECT_GE(v, 0.0);  // recession cone of R²₊
}

TEST(ExactL1, AboveLipschitzOnPlaneReturnsSample) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    RandomProblemSpec spec;
    spec.support = SupportShape::kUnbounded;
    spec.x_dependent_t = trial % 2 == 0;
    const auto p = random_problem(rng, spec);
    const Separator sep(p);
    const Vector x = {0.3, 0.6};
    const double lip = lipschitz_L(p, x, sep.dual());
    const auto out = separate_exact_l1(sep, x, lip + 1e-6, 1);
    ASSERT_EQ(out.kind, OutcomeKind::kFinite);
    EXPECT_EQ(out.xi, p.ambiguity().samples[1]);
    EXPECT_NEAR(out.value, evaluate_Z(p, x, p.ambiguity().samples[1]).value, 1e-8);
  }
}

TEST(ExactL2, LambdaStarOnPlaneReturnsSample) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    RandomProblemSpec spec;
    spec.support = SupportShape::kUnbounded;
    spec.norm = Norm::kL2;
    spec.x_dependent_t = trial % 2 == 0;
    const auto p = random_problem(rng, spec);
    const Separator sep(p);
    const Vector x = {0.8, 0.1};
    const double star = closed_form_lambda_star(sep, x);
    const auto out = separate_exact_l2(sep, x, star + 1e-9, 0);
    ASSERT_EQ(out.kind, OutcomeKind::kFinite) << trial;
    EXPECT_LE(max_abs_diff(out.xi, p.ambiguity().samples[0]), 1e-6);
    EXPECT_EQ(separate_exact_l2(sep, x, star * 0.99, 0).kind, OutcomeKind::kUnbounded);
  }
}

TEST(ExactL2, ZeroTechnologyStaysAtSample) {
  std::mt19937_64 rng(34);
  RandomProblemSpec spec;
  spec.norm = Norm::kL2;
  const auto base = random_problem(rng, spec);
  auto map = base.uncertainty();
  map.t0 = Matrix(base.my(), base.k());
  const TwoStageProblem p(base.first_stage(), base.second_stage(), map, base.support(),
                          base.ambiguity());
  const Separator sep(p);
  const Vector x = {0.5, 0.5};
  const Vector h = eval_h(map, x);
  double best = -kInf;
  for (const auto& v : sep.dual().vertices()) best = std::max(best, dot(v, h));
  for (double lambda : {0.01, 1.0, 10.0}) {
    const auto out = separate_exact_l2(sep, x, lambda, 0);
    ASSERT_EQ(out.kind, OutcomeKind::kFinite);
    EXPECT_EQ(out.xi, p.ambiguity().samples[0]);
    EXPECT_NEAR(out.value, best, 1e-9);
  }
}

TEST(BruteForce, SingletonBox) {
  auto p = counterexample_problem(1.0, BoxSupport{{1.0, 1.0}, {1.0, 1.0}});
  const auto out = separate_bruteforce(p, Vector{0.0}, 1.0, 0, 0.1);
  ASSERT_EQ(out.kind, OutcomeKind::kFinite);
  EXPECT_EQ(out.xi, (Vector{1.0, 1.0}));
}

TEST(BruteForce, CounterexampleOnBoundedBox) {
  const auto p = counterexample_problem(1.0, BoxSupport{{0.0, 0.0}, {10.0, 10.0}});
  const auto out = separate_bruteforce(p, Vector{0.0}, 1.0, 0, 0.5);
  EXPECT_NEAR(out.value, 2.0, 1e-9);
  EXPECT_NEAR(out.xi[0], 0.0, 1e-12);
  EXPECT_NEAR(out.xi[1], 0.0, 1e-12);
  EXPECT_THROW(separate_bruteforce(p, Vector{0.0}, 1.0, 0, 1e-4, 1000), Error);
}

TEST(BruteForce, AgreesWithExactOracles) {
  std::mt19937_64 rng(35);
  for (Norm norm_p : {Norm::kL1, Norm::kL2, Norm::kLInf})
    for (int trial = 0; trial < 50; ++trial) {
      RandomProblemSpec spec;
      spec.norm = norm_p;
      spec.x_dependent_t = trial % 2 == 0;
      const auto p = random_problem(rng, spec);
      const Separator sep(p);
      const Vector x = {0.25, 0.75};
      const double lip = lipschitz_L(p, x, sep.dual());
      const double lambda = lip * (0.1 + 0.9 * (trial % 10) / 9.0);
      const auto& box = p.support();
      const double diag = distance(box.lower, box.upper, Norm::kL2);
      const double step = 0.05 * diag;
      const auto ex = sep.separate_exact(x, lambda, trial % 2);
      const auto bf = separate_bruteforce(p, x, lambda, trial % 2, step);
      ASSERT_EQ(ex.kind, OutcomeKind::kFinite);
      EXPECT_GE(ex.value, bf.value - 1e-7);
      EXPECT_LE(ex.value - bf.value, 2.0 * step * lip + 1e-7)
          << norm_name(norm_p) << " trial " << trial;
      EXPECT_NEAR(ex.value, sep.g_at(x, lambda, trial % 2, ex.xi), 1e-7);
    }
}

TEST(Properties, BoundaryOptimalityAndCandidateStructure) {
  std::mt19937_64 rng(36);
  for (Norm norm_p : {Norm::kL1, Norm::kL2, Norm::kLInf})
    for (int trial = 0; trial < 40; ++trial) {
      RandomProblemSpec spec;
      spec.norm = norm_p;
      spec.k = 1 + trial % 3;
      spec.x_dependent_t = trial % 2 == 0;
      const auto p = random_problem(rng, spec);
      const Separator sep(p);
      const Vector x = {0.5, 0.2};
      const double lip = lipschitz_L(p, x, sep.dual());
      for (double frac : {0.05, 0.3, 0.7}) {
        const auto out = sep.separate_exact(x, frac * lip, 0);
        ASSERT_EQ(out.kind, OutcomeKind::kFinite);
        const auto& zeta = p.ambiguity().samples[0];
        EXPECT_TRUE(p.support().contains(out.xi, 1e-9));
        EXPECT_TRUE(max_abs_diff(out.xi, zeta) <= 1e-6 || p.support().on_boundary(out.xi, 1e-6));
        if (norm_p == Norm::kL1) {
          EXPECT_TRUE(on_candidate_grid(out.xi, candidate_grid(p.support(), zeta), 1e-6));
        }
      }
    }
}

TEST(Properties, MonotoneInLambdaAndThreshold) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    RandomProblemSpec spec;
    spec.norm = static_cast<Norm>(trial % 3);
    const auto p = random_problem(rng, spec);
    const Separator sep(p);
    const Vector x = {0.9, 0.4};
    const double lip = lipschitz_L(p, x, sep.dual());
    double prev = kInf;
    for (int s = 0; s <= 10; ++s) {
      const double v = sep.separate_exact(x, lip * s / 8.0, 1).value;
      EXPECT_LE(v, prev + 1e-9);
      prev = v;
    }
    const auto at = sep.separate_exact(x, lip * 1.0001, 1);
    const double z = evaluate_Z(p, x, p.ambiguity().samples[1]).value;
    EXPECT_GE(at.value, z - 1e-9);
    EXPECT_NEAR(at.value, z, 1e-8);
  }
}

TEST(Heuristic, NeverExceedsExactAndUsuallyMatches) {
  std::mt19937_64 rng(38);
  int matched = 0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    RandomProblemSpec spec;
    spec.norm = static_cast<Norm>(trial % 3);
    spec.k = 2 + trial % 2;
    const auto p = random_problem(rng, spec);
    const Separator sep(p);
    const Vector x = {0.1, 0.5};
    const double lambda = 0.3 * lipschitz_L(p, x, sep.dual());
    const auto ex = sep.separate_exact(x, lambda, 0);
    const auto he = sep.separate_heuristic(x, lambda, 0);
    ASSERT_EQ(he.kind, OutcomeKind::kFinite);
    EXPECT_FALSE(he.exact);
    EXPECT_LE(he.value, ex.value + 1e-8);
    EXPECT_NEAR(he.value, sep.g_at(x, lambda, 0, he.xi), 1e-7);
    if (he.value >= ex.value - 1e-7) ++matched;
  }
  EXPECT_GE(matched, trials * 3 / 4);
}

SeparatorOptions no_vertices() {
  SeparatorOptions opt;
  opt.vertex.max_dimension = 0;
  return opt;
}

TEST(BranchBound, MatchesVertexScan) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    RandomProblemSpec spec;
    spec.k = 2 + trial % 3;
    spec.my = 2 + trial % 4;
    spec.ny = spec.my + 1 + trial % 2;
    spec.x_dependent_t = trial % 2 == 1;
    const auto p = random_problem(rng, spec);
    const Separator sep(p);
    const Separator bb(p, no_vertices());
    ASSERT_FALSE(bb.dual().has_vertices());
    ASSERT_TRUE(bb.exact());
    ASSERT_TRUE(bb.uses_branch_bound());
    const Vector x = {0.3, 0.6};
    const double lambda = lipschitz_L(p, x, sep.dual()) * (trial % 7) / 6.0;
    const auto ex = sep.separate_exact(x, lambda, trial % 2);
    const auto out = bb.separate(x, lambda, trial % 2);
    ASSERT_EQ(out.kind, OutcomeKind::kFinite);
    EXPECT_TRUE(out.exact);
    EXPECT_NEAR(out.value, ex.value, 1e-7 * (1.0 + std::abs(ex.value))) << trial;
    EXPECT_NEAR(out.value, bb.g_at(x, lambda, trial % 2, out.xi), 1e-7);
  }
}

TEST(BranchBound, AgreesWithBruteForceOnTheCounterexampleBox) {
  const auto p = counterexample_problem(2.0, BoxSupport{{0.0, 0.0}, {4.0, 3.0}});
  const Separator bb(p, no_vertices());
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    const auto out = bb.separate_branch_bound(Vector{0.0}, lambda, 0);
    const auto bf = separate_bruteforce(p, Vector{0.0}, lambda, 0, 1.0);
    EXPECT_NEAR(out.value, bf.value, 1e-9) << lambda;
  }
}

TEST(BranchBound, IncrementalCutoff) {
  std::mt19937_64 rng(43);
  const auto p = random_problem(rng, {});
  const Separator bb(p, no_vertices());
  const Vector x = {0.2, 0.4};
  const double lambda = 0.2 * lipschitz_L(p, x, bb.dual());
  const double g = bb.separate(x, lambda, 0).value;
  EXPECT_EQ(bb.separate_incremental(x, lambda, 0, g + 1e-6).kind, OutcomeKind::kNoViolation);
  const auto hit = bb.separate_incremental(x, lambda, 0, g - 1e-3);
  ASSERT_EQ(hit.kind, OutcomeKind::kFinite);
  EXPECT_GT(hit.value, g - 1e-3);
  EXPECT_FALSE(hit.exact);
  SeparatorOptions heur = no_vertices();
  heur.method = SeparationMethod::kHeuristic;
  EXPECT_FALSE(Separator(p, heur).exact());
  RandomProblemSpec l2;
  l2.norm = Norm::kL2;
  EXPECT_FALSE(Separator(random_problem(rng, l2), no_vertices()).exact());
}

TEST(Heuristic, DetectsCounterexampleRay) {
  SeparatorOptions opt;
  opt.method = SeparationMethod::kHeuristic;
  const Separator sep(counterexample_problem(1.0), opt);
  EXPECT_FALSE(sep.exact());
  const auto out = sep.separate(Vector{0.0}, 0.5, 0);
  EXPECT_EQ(out.kind, OutcomeKind::kUnbounded);
  const auto fin = sep.separate(Vector{0.0}, 1.0, 0);
  ASSERT_EQ(fin.kind, OutcomeKind::kFinite);
  EXPECT_NEAR(fin.value, 2.0, 1e-9);
}

TEST(Incremental, CutoffBehaviour) {
  const auto p = counterexample_problem(0.01);
  const Separator sep(p);
  const Vector x = {0.0};
  EXPECT_EQ(sep.separate_incremental(x, 1.0, 0, 1e9).kind, OutcomeKind::kNoViolation);
  const auto first = sep.separate_incremental(x, 1.0, 0, -1e9);
  ASSERT_EQ(first.kind, OutcomeKind::kFinite);
  EXPECT_EQ(first.xi, (Vector{1.0, 1.0}));
  EXPECT_NEAR(first.value, 0.0, 1e-12);
  const auto cut = sep.separate_incremental(x, 1.0, 0, 1.0);
  ASSERT_EQ(cut.kind, OutcomeKind::kFinite);
  EXPECT_NEAR(cut.value, 2.0, 1e-9);
  EXPECT_EQ(cut.xi, (Vector{0.0, 0.0}));
  SeparationBudget tight;
  tight.max_evaluations = 1;
  EXPECT_EQ(sep.separate_incremental(x, 1.0, 0, 1.0, tight).kind, OutcomeKind::kIncomplete);
}

TEST(LambdaStar, CounterexampleOnPlane) {
  const auto p = counterexample_problem(1.0, kPlane);
  EXPECT_NEAR(closed_form_lambda_star(p, Vector{0.0}), 2.0, 1e-9);
  EXPECT_THROW(closed_form_lambda_star(counterexample_problem(1.0), Vector{0.0}), Error);
}

TEST(LambdaStar, ZeroTechnologyAndSingletonDual) {
  std::mt19937_64 rng(39);
  RandomProblemSpec spec;
  spec.support = SupportShape::kUnbounded;
  const auto base = random_problem(rng, spec);
  auto map = base.uncertainty();
  map.t0 = Matrix(base.my(), base.k());
  EXPECT_NEAR(closed_form_lambda_star(TwoStageProblem(base.first_stage(), base.second_stage(),
                                                      map, base.support(), base.ambiguity()),
                                      Vector{0.5, 0.5}),
              0.0, 1e-12);

  // Π = {π0}: equality columns ±e_r at costs ±π0_r pin each π_r.
  const Vector pi0 = {0.7, -1.2};
  for (Norm norm_p : {Norm::kL1, Norm::kL2, Norm::kLInf}) {
    SecondStage s;
    s.w = Matrix::from_rows({{1.0, -1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, -1.0}});
    s.cost = {pi0[0], -pi0[0], pi0[1], -pi0[1]};
    s.row_types = {RecourseRow::kEqual, RecourseRow::kEqual};
    UncertaintyAffineMap m{{0.0, 0.0}, Matrix(2, 1), Matrix::from_rows({{1.0, 2.0, -1.0},
                                                                          {0.5, -3.0, 0.25}}),
                           {}};
    const TwoStageProblem p({{0.0}, Matrix(0, 1), {}, {0.0}, {1.0}, {}}, s, m,
                            BoxSupport{Vector(3, -kInf), Vector(3, kInf)},
                            AmbiguitySet{{{0.0, 0.0, 0.0}}, 1.0, norm_p});
    const Vector direct = multiply_transposed(m.t0, pi0);
    EXPECT_NEAR(closed_form_lambda_star(p, Vector{0.0}), norm(direct, dual_norm(norm_p)), 1e-9)
        << norm_name(norm_p);
  }
}

}  // namespace
}  // namespace wdro
