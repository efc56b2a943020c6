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

// Relaxed master problem over pooled scenarios Ξ′ and rays R′:
//
//   min  cᵀx + ελ + (1/N) Σ_i t_i
//   s.t. Ax = b, x ∈ [lb, ub], 0 <= λ <= L̄, t_i >= t_i^lo
//        t_i >= θ_ξ - λ‖ξ - ζ^i‖          i ∈ [N], ξ ∈ Ξ′
//        θ_ξ >= πᵀ(h(x) + T(x)ξ)          π ∈ Π_ξ
//        λ   >= πᵀT(x)r                   r ∈ R′, π ∈ Π_r
//
// Variables are laid out as [x | λ | t | θ | ν/μ blocks].

#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "wdro/linalg.hpp"
#include "wdro/lp_core.hpp"
#include "wdro/model.hpp"
#include "wdro/second_stage.hpp"

namespace wdro {

enum class AddResult { kAdded, kDuplicate };

class CutPools {
 public:
  explicit CutPools(const TwoStageProblem& p, double dedup_tol = 1e-7) : tol_(dedup_tol) {
    for (const auto& z : p.ambiguity().samples)
      if (!find_scenario(z)) {
        scenarios_.push_back(z);
        scenario_duals_.emplace_back();
      }
  }

  double dedup_tol() const noexcept { return tol_; }
  const std::vector<Vector>& scenarios() const noexcept { return scenarios_; }
  const std::vector<std::vector<DualPoint>>& scenario_duals() const noexcept {
    return scenario_duals_;
  }
  const std::vector<Vector>& rays() const noexcept { return rays_; }
  const std::vector<std::vector<DualPoint>>& ray_duals() const noexcept { return ray_duals_; }

  std::size_t optimality_cut_count() const {
    std::size_t n = 0;
    for (const auto& d : scenario_duals_) n += d.size();
    return n;
  }
  std::size_t lambda_cut_count() const {
    std::size_t n = 0;
    for (const auto& d : ray_duals_) n += d.size();
    return n;
  }

  std::optional<std::size_t> find_scenario(std::span<const double> xi) const {
    return find(scenarios_, xi);
  }
  std::optional<std::size_t> find_ray(std::span<const double> r) const { return find(rays_, r); }

  // New scenario ξ with Π_ξ = {π}, or Π_ξ = {} when π is empty.
  AddResult add_scenario(std::span<const double> xi, const DualPoint& pi = {}) {
    if (find_scenario(xi)) return AddResult::kDuplicate;
    scenarios_.emplace_back(xi.begin(), xi.end());
    scenario_duals_.emplace_back();
    if (!pi.pi.empty()) scenario_duals_.back().push_back(pi);
    return AddResult::kAdded;
  }

  AddResult add_optimality_cut(std::span<const double> xi, const DualPoint& pi) {
    const auto s = find_scenario(xi);
    require(s.has_value(), ErrorCode::kInvalidArgument, "optimality cut for an unknown scenario");
    return add_dual(scenario_duals_[*s], pi);
  }

  AddResult add_lambda_cut(std::span<const double> r, const DualPoint& pi) {
    auto s = find_ray(r);
    if (!s) {
      rays_.emplace_back(r.begin(), r.end());
      ray_duals_.emplace_back();
      s = rays_.size() - 1;
    }
    return add_dual(ray_duals_[*s], pi);
  }

 private:
  std::optional<std::size_t> find(const std::vector<Vector>& pool,
                                  std::span<const double> v) const {
    for (std::size_t s = 0; s < pool.size(); ++s)
      if (pool[s].size() == v.size() && max_abs_diff(pool[s], v) <= tol_) return s;
    return std::nullopt;
  }

  AddResult add_dual(std::vector<DualPoint>& pool, const DualPoint& pi) {
    for (const auto& d : pool)
      if (max_abs_diff(d.pi, pi.pi) <= tol_) return AddResult::kDuplicate;
    pool.push_back(pi);
    return AddResult::kAdded;
  }

  double tol_;
  std::vector<Vector> scenarios_;
  std::vector<std::vector<DualPoint>> scenario_duals_;
  std::vector<Vector> rays_;
  std::vector<std::vector<DualPoint>> ray_duals_;
};

struct MasterOptions {
  double lambda_cap = kInf;  // L̄
  Vector t_lower;            // per sample; empty means -M0 for all
  double default_t_lower = -1e6;
};

struct MasterLayout {
  std::size_t nx = 0, n = 0, scenarios = 0;
  std::size_t lambda = 0, t0 = 0, theta0 = 0, extra0 = 0;
  std::size_t epigraph_row0 = 0;  // row of (i, s) is epigraph_row0 + i * scenarios + s
};

struct MasterProblem {
  LinearProgram lp;
  MasterLayout layout;
};

struct MasterSolution {
  Vector x;
  double lambda = 0.0;
  Vector t;
  Vector theta;
  double objective = 0.0;
  Vector scenario_weight;  // Σ_i of epigraph duals per scenario
  Vector t_bound_weight;   // reduced cost of t_i at its lower bound
};

namespace detail {

// Coefficients of πᵀ(h(x) + T(x)ξ) = const + Σ_i coef_i x_i.
inline std::pair<double, Vector> affine_in_x(const UncertaintyAffineMap& map,
                                             std::span<const double> pi,
                                             std::span<const double> xi) {
  const std::size_t nx = map.h.cols();
  double c = dot(pi, map.h0);
  if (!xi.empty()) c += dot(pi, multiply(map.t0, xi));
  Vector coef = multiply_transposed(map.h, pi);
  for (std::size_t i = 0; i < map.t_list.size(); ++i)
    if (!xi.empty()) coef[i] += dot(pi, multiply(map.t_list[i], xi));
  coef.resize(nx);
  return {c, coef};
}

// πᵀT(x)r = const + Σ_i coef_i x_i.
inline std::pair<double, Vector> ray_affine_in_x(const UncertaintyAffineMap& map,
                                                 std::span<const double> pi,
                                                 std::span<const double> r) {
  const std::size_t nx = map.h.cols();
  const double c = dot(pi, multiply(map.t0, r));
  Vector coef(nx, 0.0);
  for (std::size_t i = 0; i < map.t_list.size(); ++i) coef[i] = dot(pi, multiply(map.t_list[i], r));
  return {c, coef};
}

}  // namespace detail

inline MasterProblem build_master(const TwoStageProblem& p, const CutPools& pools,
                                  const MasterOptions& options = {}) {
  const std::size_t nx = p.nx(), n = p.num_samples(), ns = pools.scenarios().size();
  require(options.t_lower.empty() || options.t_lower.size() == n, ErrorCode::kDimensionMismatch,
          "t lower bounds must have one entry per sample");
  for (const auto& s : pools.scenarios())
    require(s.size() == p.k(), ErrorCode::kDimensionMismatch, "scenario dimension");
  const auto& f = p.first_stage();
  const auto& map = p.uncertainty();
  LpBuilder b;
  MasterLayout lay;
  lay.nx = nx;
  lay.n = n;
  lay.scenarios = ns;
  for (std::size_t i = 0; i < nx; ++i) b.add_variable(f.cost[i], f.lower[i], f.upper[i]);
  lay.lambda = b.add_variable(p.epsilon(), 0.0, options.lambda_cap);
  lay.t0 = b.num_variables();
  for (std::size_t i = 0; i < n; ++i)
    b.add_variable(1.0 / static_cast<double>(n), 0.0, kInf);
  lay.theta0 = b.num_variables();
  for (std::size_t s = 0; s < ns; ++s) b.add_variable(0.0, -kInf, kInf);
  lay.extra0 = b.num_variables();

  for (std::size_t r = 0; r < f.a.rows(); ++r) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t i = 0; i < nx; ++i)
      if (f.a(r, i) != 0.0) terms.emplace_back(i, f.a(r, i));
    b.add_row(std::move(terms), RowSense::kEqual, f.b[r]);
  }

  lay.epigraph_row0 = b.num_rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < ns; ++s) {
      const double d = distance(pools.scenarios()[s], p.ambiguity().samples[i], p.norm());
      std::vector<std::pair<std::size_t, double>> terms{{lay.t0 + i, 1.0}, {lay.theta0 + s, -1.0}};
      if (d != 0.0) terms.emplace_back(lay.lambda, d);
      b.add_row(std::move(terms), RowSense::kGreaterEqual, 0.0);
    }

  for (std::size_t s = 0; s < ns; ++s)
    for (const auto& pi : pools.scenario_duals()[s]) {
      const auto [c, coef] = detail::affine_in_x(map, pi.pi, pools.scenarios()[s]);
      std::vector<std::pair<std::size_t, double>> terms{{lay.theta0 + s, 1.0}};
      for (std::size_t i = 0; i < nx; ++i)
        if (coef[i] != 0.0) terms.emplace_back(i, -coef[i]);
      b.add_row(std::move(terms), RowSense::kGreaterEqual, c);
    }

  for (std::size_t r = 0; r < pools.rays().size(); ++r)
    for (const auto& pi : pools.ray_duals()[r]) {
      const auto [c, coef] = detail::ray_affine_in_x(map, pi.pi, pools.rays()[r]);
      std::vector<std::pair<std::size_t, double>> terms{{lay.lambda, 1.0}};
      for (std::size_t i = 0; i < nx; ++i)
        if (coef[i] != 0.0) terms.emplace_back(i, -coef[i]);
      b.add_row(std::move(terms), RowSense::kGreaterEqual, c);
    }

  MasterProblem m{b.build(), lay};
  for (std::size_t i = 0; i < n; ++i)
    m.lp.lower[lay.t0 + i] = options.t_lower.empty() ? options.default_t_lower : options.t_lower[i];
  return m;
}

// Adds, for j ∈ J₊, a block ν^j >= 0 with λ >= qᵀν^j and Wν^j >= T(x)e_j, and
// for j ∈ J₋ a block μ^j with λ >= qᵀμ^j and Wμ^j >= -T(x)e_j. Together they
// enforce λ >= U(x, ±e^j), the implicit constraint of an unbounded box.
inline MasterProblem add_explicit_ray_constraints(const TwoStageProblem& p, MasterProblem m) {
  require(p.norm() == Norm::kL1, ErrorCode::kRequiresL1Norm,
          "explicit ray constraints are derived for the l1 ground norm");
  const auto& s = p.second_stage();
  const auto& map = p.uncertainty();
  std::vector<std::pair<std::size_t, double>> dirs;
  for (std::size_t j : p.support().unbounded_above()) dirs.emplace_back(j, 1.0);
  for (std::size_t j : p.support().unbounded_below()) dirs.emplace_back(j, -1.0);
  if (dirs.empty()) return m;

  const std::size_t old_cols = m.lp.num_cols();
  const std::size_t ny = s.cols(), my = s.rows();
  const std::size_t new_cols = old_cols + dirs.size() * ny;
  const std::size_t old_rows = m.lp.num_rows();
  const std::size_t new_rows = old_rows + dirs.size() * (1 + my);
  Matrix a(new_rows, new_cols);
  for (std::size_t r = 0; r < old_rows; ++r)
    for (std::size_t c = 0; c < old_cols; ++c) a(r, c) = m.lp.matrix(r, c);
  m.lp.objective.resize(new_cols, 0.0);
  m.lp.lower.resize(new_cols, 0.0);
  m.lp.upper.resize(new_cols, kInf);
  std::size_t row = old_rows;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const auto [j, sign] = dirs[d];
    const std::size_t col0 = old_cols + d * ny;
    a(row, m.layout.lambda) = 1.0;
    for (std::size_t c = 0; c < ny; ++c) a(row, col0 + c) = -s.cost[c];
    m.lp.senses.push_back(RowSense::kGreaterEqual);
    m.lp.rhs.push_back(0.0);
    ++row;
    for (std::size_t r = 0; r < my; ++r, ++row) {
      for (std::size_t c = 0; c < ny; ++c) a(row, col0 + c) = s.w(r, c);
      for (std::size_t i = 0; i < map.t_list.size(); ++i) a(row, i) = -sign * map.t_list[i](r, j);
      m.lp.senses.push_back(s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual
                                                                 : RowSense::kGreaterEqual);
      m.lp.rhs.push_back(sign * map.t0(r, j));
    }
  }
  m.lp.matrix = std::move(a);
  return m;
}

inline MasterSolution read_master_solution(const MasterProblem& m, const LpSolution& sol) {
  const auto& lay = m.layout;
  MasterSolution out;
  out.x.assign(sol.primal.begin(), sol.primal.begin() + lay.nx);
  out.lambda = sol.primal[lay.lambda];
  out.t.assign(sol.primal.begin() + lay.t0, sol.primal.begin() + lay.t0 + lay.n);
  out.theta.assign(sol.primal.begin() + lay.theta0,
                   sol.primal.begin() + lay.theta0 + lay.scenarios);
  out.objective = sol.objective;
  out.scenario_weight.assign(lay.scenarios, 0.0);
  for (std::size_t i = 0; i < lay.n; ++i)
    for (std::size_t s = 0; s < lay.scenarios; ++s)
      out.scenario_weight[s] += std::max(0.0, sol.dual[lay.epigraph_row0 + i * lay.scenarios + s]);
  out.t_bound_weight.resize(lay.n);
  for (std::size_t i = 0; i < lay.n; ++i)
    out.t_bound_weight[i] = std::max(0.0, sol.reduced_costs[lay.t0 + i]);
  return out;
}

inline MasterSolution solve_master(const MasterProblem& m, const LpOptions& options = {}) {
  const auto sol = solve_lp(m.lp, options);
  require(sol.status != LpStatus::kInfeasible, ErrorCode::kInvalidArgument,
          "master problem is infeasible (empty first-stage set X)");
  require(sol.status == LpStatus::kOptimal, ErrorCode::kNumericalBreakdown,
          "master problem is unbounded; t lower bounds are missing");
  return read_master_solution(m, sol);
}

// Per-sample t_i >= min_{x∈box} π0ᵀ(h(x) + T(x)ζ^i) for a π0 ∈ Π taken from
// Z at the box midpoint. Valid since t_i >= g_i(x, λ) >= Z(x, ζ^i).
inline Vector t_lower_bounds(const TwoStageProblem& p, const LpOptions& options = {}) {
  const auto& f = p.first_stage();
  Vector mid(p.nx());
  for (std::size_t i = 0; i < p.nx(); ++i) mid[i] = 0.5 * (f.lower[i] + f.upper[i]);
  Vector out;
  for (const auto& z : p.ambiguity().samples) {
    const auto pi = evaluate_Z(p, mid, z, options).dual.pi;
    const auto [c, coef] = detail::affine_in_x(p.uncertainty(), pi, z);
    double v = c;
    for (std::size_t i = 0; i < p.nx(); ++i) v += std::min(coef[i] * f.lower[i], coef[i] * f.upper[i]);
    out.push_back(v - 1e-9 * (1.0 + std::abs(v)));
  }
  return out;
}

inline void dump_master(std::ostream& out, const MasterProblem& m) { write_lp_text(out, m.lp); }

}  // namespace wdro
