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

// Test-only reference computations. Nothing here calls into the code paths it
// is used to check, except where noted (second-stage values come from
// solve_lp, which has its own independent oracle below).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "wdro/lp_core.hpp"
#include "wdro/model.hpp"

namespace wdro::testing {

// Solves a dense square system by Gaussian elimination with partial pivoting.
inline bool solve_square(std::vector<Vector> a, Vector b, Vector& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-10) return false;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// Vertices by brute force over all n-subsets of constraints (rows and finite
// bounds; equality rows are always included).
inline std::vector<Vector> brute_force_vertices(const LinearProgram& lp, double tol = 1e-7) {
  const std::size_t n = lp.num_cols();
  std::vector<Vector> hyper;
  Vector rhs;
  std::vector<char> forced;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    hyper.emplace_back(lp.matrix.row(i).begin(), lp.matrix.row(i).end());
    rhs.push_back(lp.rhs[i]);
    forced.push_back(lp.senses[i] == RowSense::kEqual);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (double bound : {lp.lower[j], lp.upper[j]}) {
      if (!std::isfinite(bound)) continue;
      Vector e(n, 0.0);
      e[j] = 1.0;
      hyper.push_back(e);
      rhs.push_back(bound);
      forced.push_back(0);
    }
  }
  std::vector<Vector> out;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (pick.size() == n) {
      for (std::size_t i = 0; i < hyper.size(); ++i)
        if (forced[i] && std::find(pick.begin(), pick.end(), i) == pick.end()) return;
      std::vector<Vector> a;
      Vector b;
      for (std::size_t i : pick) {
        a.push_back(hyper[i]);
        b.push_back(rhs[i]);
      }
      Vector x;
      if (!solve_square(a, b, x)) return;
      if (primal_residual(lp, x) > tol) return;
      for (const auto& v : out)
        if (max_abs_diff(v, x) <= tol) return;
      out.push_back(x);
      return;
    }
    for (std::size_t i = start; i < hyper.size(); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

// A random bounded LP with a known interior-ish feasible point.
inline LinearProgram random_bounded_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<int> kind(0, 5);
  LinearProgram lp;
  lp.objective.resize(n);
  for (double& c : lp.objective) c = coef(rng);
  Vector x0(n);
  for (double& v : x0) v = coef(rng) * 0.5;
  lp.lower.assign(n, -kInf);
  lp.upper.assign(n, kInf);
  lp.matrix = Matrix(0, n);
  for (std::size_t j = 0; j < n; ++j) {
    // Finite box through bounds or through explicit rows.
    if (kind(rng) < 3) {
      lp.lower[j] = x0[j] - 2.0 - std::abs(coef(rng));
      lp.upper[j] = x0[j] + 2.0 + std::abs(coef(rng));
    } else {
      Vector e(n, 0.0);
      e[j] = 1.0;
      lp.matrix.append_row(e);
      lp.senses.push_back(RowSense::kLessEqual);
      lp.rhs.push_back(x0[j] + 3.0);
      lp.matrix.append_row(e);
      lp.senses.push_back(RowSense::kGreaterEqual);
      lp.rhs.push_back(x0[j] - 3.0);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    Vector a(n);
    for (double& v : a) v = std::round(coef(rng) * 4.0) / 4.0;
    const double ax = dot(a, x0);
    const int k = kind(rng);
    lp.matrix.append_row(a);
    if (k == 0) {
      lp.senses.push_back(RowSense::kEqual);
      lp.rhs.push_back(ax);
    } else if (k % 2 == 1) {
      lp.senses.push_back(RowSense::kLessEqual);
      lp.rhs.push_back(ax + std::abs(coef(rng)));
    } else {
      lp.senses.push_back(RowSense::kGreaterEqual);
      lp.rhs.push_back(ax - std::abs(coef(rng)));
    }
  }
  return lp;
}


// Z(x, ξ) as max over brute-force ext(Π) of πᵀ(h(x) + T(x)ξ).
inline double z_by_vertices(const TwoStageProblem& p, std::span<const double> x,
                            std::span<const double> xi) {
  const auto verts = brute_force_vertices(dual_polytope_region(p.second_stage()));
  Vector rhs = p.uncertainty().h0;
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    for (std::size_t i = 0; i < x.size(); ++i) rhs[r] += p.uncertainty().h(r, i) * x[i];
    for (std::size_t j = 0; j < xi.size(); ++j) {
      double t = p.uncertainty().t0(r, j);
      for (std::size_t i = 0; i < p.uncertainty().t_list.size(); ++i)
        t += x[i] * p.uncertainty().t_list[i](r, j);
      rhs[r] += t * xi[j];
    }
  }
  double best = -kInf;
  for (const auto& v : verts) {
    double s = 0.0;
    for (std::size_t r = 0; r < rhs.size(); ++r) s += v[r] * rhs[r];
    best = std::max(best, s);
  }
  return best;
}

enum class SupportShape { kBounded, kUnbounded, kOrthant };

struct RandomProblemSpec {
  std::size_t nx = 2, k = 2, my = 2, ny = 3, samples = 2;
  Norm norm = Norm::kL1;
  SupportShape support = SupportShape::kBounded;
  bool x_dependent_t = false;
  double epsilon = 0.5;
  double penalty = 4.0;
};

// Random instance with slack-completed recourse, q > 0 (so 0 ∈ Π) and
// Π ⊆ [0, penalty]^my.
inline TwoStageProblem random_problem(std::mt19937_64& rng, const RandomProblemSpec& spec) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  FirstStage f;
  f.cost.resize(spec.nx);
  for (auto& c : f.cost) c = u(rng);
  f.a = Matrix(0, spec.nx);
  f.lower.assign(spec.nx, 0.0);
  f.upper.assign(spec.nx, 1.0);

  SecondStage s;
  s.cost.resize(spec.ny);
  for (auto& q : s.cost) q = pos(rng);
  s.w = Matrix(spec.my, spec.ny);
  for (std::size_t r = 0; r < spec.my; ++r)
    for (std::size_t c = 0; c < spec.ny; ++c) s.w(r, c) = u(rng);

  UncertaintyAffineMap map;
  map.h0.resize(spec.my);
  for (auto& h : map.h0) h = 2.0 * u(rng);
  map.h = Matrix(spec.my, spec.nx);
  for (std::size_t r = 0; r < spec.my; ++r)
    for (std::size_t i = 0; i < spec.nx; ++i) map.h(r, i) = u(rng);
  map.t0 = Matrix(spec.my, spec.k);
  for (std::size_t r = 0; r < spec.my; ++r)
    for (std::size_t j = 0; j < spec.k; ++j) map.t0(r, j) = u(rng);
  if (spec.x_dependent_t) {
    for (std::size_t i = 0; i < spec.nx; ++i) {
      Matrix t(spec.my, spec.k);
      for (std::size_t r = 0; r < spec.my; ++r)
        for (std::size_t j = 0; j < spec.k; ++j) t(r, j) = 0.5 * u(rng);
      map.t_list.push_back(t);
    }
  }

  BoxSupport box;
  AmbiguitySet amb;
  amb.norm = spec.norm;
  amb.epsilon = spec.epsilon;
  box.lower.resize(spec.k);
  box.upper.resize(spec.k);
  for (std::size_t j = 0; j < spec.k; ++j) {
    switch (spec.support) {
      case SupportShape::kBounded:
        box.lower[j] = -pos(rng);
        box.upper[j] = pos(rng);
        break;
      case SupportShape::kUnbounded:
        box.lower[j] = -kInf;
        box.upper[j] = kInf;
        break;
      case SupportShape::kOrthant:
        box.lower[j] = 0.0;
        box.upper[j] = kInf;
        break;
    }
  }
  for (std::size_t i = 0; i < spec.samples; ++i) {
    Vector z(spec.k);
    for (std::size_t j = 0; j < spec.k; ++j) {
      const double lo = std::isfinite(box.lower[j]) ? box.lower[j] : -1.5;
      const double hi = std::isfinite(box.upper[j]) ? box.upper[j] : 1.5;
      z[j] = lo + (hi - lo) * 0.5 * (u(rng) + 1.0);
    }
    amb.samples.push_back(z);
  }
  TwoStageProblem base(std::move(f), std::move(s), std::move(map), std::move(box),
                       std::move(amb));
  return augment_with_slacks(base, spec.penalty);
}

// DRO value with Ξ replaced by the finite set `grid`, as one extensive LP:
//   min cᵀx + ελ + (1/N)Σ t_i
//   s.t. t_i >= qᵀy^g - λ‖g - ζ^i‖,  W y^g (>= or =) h(x) + T(x)g.
// Exact when every worst case lies on the grid; a lower bound otherwise.
// With `axis_rays`, adds λ >= qᵀν, Wν >= ±T(x)e_j for every unbounded
// direction of the box, which makes the grid of finite bounds and sample
// values exact for l1 on unbounded boxes too.
struct GridDroValue {
  double value = 0.0;
  Vector x;
  double lambda = 0.0;
};

inline GridDroValue dro_value_on_grid(const TwoStageProblem& p, const std::vector<Vector>& grid,
                                      bool axis_rays = false) {
  const auto& f = p.first_stage();
  const auto& s = p.second_stage();
  const auto& map = p.uncertainty();
  const std::size_t nx = p.nx(), ny = p.ny(), n = p.num_samples();
  LpBuilder b;
  for (std::size_t i = 0; i < nx; ++i) b.add_variable(f.cost[i], f.lower[i], f.upper[i]);
  const std::size_t lam = b.add_variable(p.epsilon(), 0.0, kInf);
  const std::size_t t0 = b.num_variables();
  for (std::size_t i = 0; i < n; ++i) b.add_variable(1.0 / static_cast<double>(n), -kInf, kInf);
  for (std::size_t r = 0; r < f.a.rows(); ++r) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t i = 0; i < nx; ++i) terms.emplace_back(i, f.a(r, i));
    b.add_row(std::move(terms), RowSense::kEqual, f.b[r]);
  }
  for (const auto& g : grid) {
    const std::size_t y0 = b.num_variables();
    for (std::size_t c = 0; c < ny; ++c) b.add_variable(0.0, 0.0, kInf);
    for (std::size_t r = 0; r < s.rows(); ++r) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t c = 0; c < ny; ++c) terms.emplace_back(y0 + c, s.w(r, c));
      double rhs = map.h0[r];
      for (std::size_t j = 0; j < g.size(); ++j) rhs += map.t0(r, j) * g[j];
      for (std::size_t v = 0; v < nx; ++v) {
        double coef = map.h(r, v);
        if (v < map.t_list.size())
          for (std::size_t j = 0; j < g.size(); ++j) coef += map.t_list[v](r, j) * g[j];
        terms.emplace_back(v, -coef);
      }
      b.add_row(std::move(terms),
                s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual : RowSense::kGreaterEqual,
                rhs);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& z = p.ambiguity().samples[i];
      double d = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double a = std::abs(g[j] - z[j]);
        if (p.norm() == Norm::kL1) d += a;
        else if (p.norm() == Norm::kL2) d += a * a;
        else d = std::max(d, a);
      }
      if (p.norm() == Norm::kL2) d = std::sqrt(d);
      std::vector<std::pair<std::size_t, double>> terms{{t0 + i, 1.0}, {lam, d}};
      for (std::size_t c = 0; c < ny; ++c) terms.emplace_back(y0 + c, -s.cost[c]);
      b.add_row(std::move(terms), RowSense::kGreaterEqual, 0.0);
    }
  }
  if (axis_rays)
    for (std::size_t j = 0; j < p.k(); ++j)
      for (double sign : {1.0, -1.0}) {
        if (sign > 0 ? std::isfinite(p.support().upper[j]) : std::isfinite(p.support().lower[j]))
          continue;
        const std::size_t v0 = b.num_variables();
        for (std::size_t c = 0; c < ny; ++c) b.add_variable(0.0, 0.0, kInf);
        std::vector<std::pair<std::size_t, double>> lrow{{lam, 1.0}};
        for (std::size_t c = 0; c < ny; ++c) lrow.emplace_back(v0 + c, -s.cost[c]);
        b.add_row(std::move(lrow), RowSense::kGreaterEqual, 0.0);
        for (std::size_t r = 0; r < s.rows(); ++r) {
          std::vector<std::pair<std::size_t, double>> terms;
          for (std::size_t c = 0; c < ny; ++c) terms.emplace_back(v0 + c, s.w(r, c));
          for (std::size_t v = 0; v < map.t_list.size(); ++v)
            terms.emplace_back(v, -sign * map.t_list[v](r, j));
          b.add_row(std::move(terms),
                    s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual
                                                         : RowSense::kGreaterEqual,
                    sign * map.t0(r, j));
        }
      }
  const auto sol = solve_lp(b.build());
  GridDroValue out;
  out.value = sol.status == LpStatus::kOptimal ? sol.objective : -kInf;
  if (sol.status == LpStatus::kOptimal) {
    out.x.assign(sol.primal.begin(), sol.primal.begin() + nx);
    out.lambda = sol.primal[lam];
  }
  return out;
}

// Product grid over the box: per coordinate the finite bounds, every sample
// value and, on bounded coordinates, `extra` evenly spaced interior points.
inline std::vector<Vector> box_grid(const TwoStageProblem& p, std::size_t extra) {
  const auto& box = p.support();
  std::vector<std::vector<double>> axes(p.k());
  for (std::size_t j = 0; j < p.k(); ++j) {
    auto& a = axes[j];
    for (double v : {box.lower[j], box.upper[j]})
      if (std::isfinite(v)) a.push_back(v);
    for (const auto& z : p.ambiguity().samples) a.push_back(z[j]);
    if (std::isfinite(box.lower[j]) && std::isfinite(box.upper[j]))
      for (std::size_t e = 1; e <= extra; ++e)
      a.push_back(box.lower[j] + (box.upper[j] - box.lower[j]) * static_cast<double>(e) /
                                     static_cast<double>(extra + 1));
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<Vector> out{{}};
  for (const auto& a : axes) {
    std::vector<Vector> next;
    for (const auto& prefix : out)
      for (double v : a) {
        Vector g = prefix;
        g.push_back(v);
        next.push_back(std::move(g));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace wdro::testing
