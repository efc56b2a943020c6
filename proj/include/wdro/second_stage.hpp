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

// Recourse evaluation Z(x, ξ) with its dual, recession pricing U(x, r), the
// dual polytope Π and the Lipschitz constants derived from it.

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "wdro/linalg.hpp"
#include "wdro/lp_core.hpp"
#include "wdro/model.hpp"

namespace wdro {

enum class DualSource { kRecourse, kRecession, kVertex, kSeparation, kHeuristic };

struct DualPoint {
  Vector pi;
  DualSource source = DualSource::kRecourse;
};

// π_r >= 0 on ">=" rows and Wᵀπ <= q, both within tol.
inline bool is_dual_feasible(const SecondStage& s, std::span<const double> pi, double tol) {
  if (pi.size() != s.rows()) return false;
  for (std::size_t r = 0; r < s.rows(); ++r)
    if (s.row_type(r) == RecourseRow::kGreaterEqual && pi[r] < -tol) return false;
  for (std::size_t c = 0; c < s.cols(); ++c) {
    double v = 0.0;
    for (std::size_t r = 0; r < s.rows(); ++r) v += s.w(r, c) * pi[r];
    if (v > s.cost[c] + tol) return false;
  }
  return true;
}

struct RecourseValue {
  double value = 0.0;
  DualPoint dual;
  Vector y;
};

namespace detail {

inline LinearProgram recourse_lp(const SecondStage& s, Vector rhs) {
  LinearProgram lp;
  lp.objective = s.cost;
  lp.matrix = s.w;
  lp.rhs = std::move(rhs);
  lp.lower.assign(s.cols(), 0.0);
  lp.upper.assign(s.cols(), kInf);
  lp.senses.resize(s.rows());
  for (std::size_t r = 0; r < s.rows(); ++r)
    lp.senses[r] = s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual : RowSense::kGreaterEqual;
  return lp;
}

inline RecourseValue solve_recourse(const SecondStage& s, Vector rhs, DualSource source,
                                    const LpOptions& options) {
  const auto sol = solve_lp(recourse_lp(s, std::move(rhs)), options);
  if (sol.status == LpStatus::kInfeasible)
    fail(ErrorCode::kRecourseInfeasible, "second stage is infeasible (complete recourse fails)");
  if (sol.status == LpStatus::kUnbounded)
    fail(ErrorCode::kDualInfeasible, "second stage is unbounded (dual polytope is empty)");
  RecourseValue out;
  out.value = sol.objective;
  out.y = sol.primal;
  out.dual.pi = sol.dual;
  out.dual.source = source;
  for (std::size_t r = 0; r < s.rows(); ++r)
    if (s.row_type(r) == RecourseRow::kGreaterEqual && out.dual.pi[r] < 0.0) out.dual.pi[r] = 0.0;
  return out;
}

}  // namespace detail

// Z(x, ξ) = min {qᵀy : Wy >= h(x) + T(x)ξ, y >= 0} and a maximizing π.
inline RecourseValue evaluate_Z(const TwoStageProblem& p, std::span<const double> x,
                                std::span<const double> xi, const LpOptions& options = {}) {
  require(x.size() == p.nx(), ErrorCode::kDimensionMismatch, "evaluate_Z: x length");
  require(xi.size() == p.k(), ErrorCode::kDimensionMismatch, "evaluate_Z: xi length");
  return detail::solve_recourse(p.second_stage(), recourse_rhs(p, x, xi), DualSource::kRecourse,
                                options);
}

// U(x, r) = max_{π∈Π} πᵀT(x)r, solved as its primal min {qᵀy : Wy >= T(x)r}.
inline RecourseValue recession_price_U(const TwoStageProblem& p, std::span<const double> x,
                                       std::span<const double> r, const LpOptions& options = {},
                                       double norm_tol = 1e-6) {
  require(r.size() == p.k(), ErrorCode::kDimensionMismatch, "recession_price_U: r length");
  require(std::abs(norm(r, p.norm()) - 1.0) <= norm_tol, ErrorCode::kInvalidArgument,
          "recession_price_U: ray must have unit norm");
  return detail::solve_recourse(p.second_stage(), multiply(eval_T(p.uncertainty(), x), r),
                                DualSource::kRecession, options);
}

// v_SAA(x) = (1/N) Σ_i Z(x, ζ^i).
inline double saa_value(const TwoStageProblem& p, std::span<const double> x,
                        const LpOptions& options = {}) {
  double sum = 0.0;
  for (const auto& z : p.ambiguity().samples) sum += evaluate_Z(p, x, z, options).value;
  return sum / static_cast<double>(p.num_samples());
}

// Π of a problem, with its vertices when enumeration fits under the cap.
// Π does not depend on x, so one instance serves a whole solve.
class DualPolytope {
 public:
  explicit DualPolytope(const TwoStageProblem& p, const VertexOptions& options = {},
                        bool enumerate = true)
      : region_(dual_polytope_region(p.second_stage())) {
    const std::size_t my = region_.num_cols();
    coordinate_bound_.assign(my, 0.0);
    LinearProgram probe = region_;
    for (std::size_t r = 0; r < my; ++r)
      for (double sign : {-1.0, 1.0}) {
        std::fill(probe.objective.begin(), probe.objective.end(), 0.0);
        probe.objective[r] = sign;
        const auto sol = solve_lp(probe, options.lp);
        require(sol.status != LpStatus::kUnbounded, ErrorCode::kRegionUnbounded,
                "dual polytope is unbounded");
        require(sol.status == LpStatus::kOptimal, ErrorCode::kDualInfeasible,
                "dual polytope is empty");
        coordinate_bound_[r] = std::max(coordinate_bound_[r], std::abs(sol.primal[r]));
      }
    if (enumerate && my <= options.max_dimension) {
      try {
        vertices_ = enumerate_vertices(region_, options);
        enumerated_ = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDimensionTooLarge) throw;
      }
    }
  }

  const LinearProgram& region() const noexcept { return region_; }
  bool has_vertices() const noexcept { return enumerated_; }
  const std::vector<Vector>& vertices() const noexcept { return vertices_; }
  const Vector& coordinate_bound() const noexcept { return coordinate_bound_; }

  // Whether max_norm(q) is the exact maximum rather than an upper bound.
  bool max_norm_exact(Norm q) const { return q == Norm::kLInf || enumerated_; }

  // max_{π∈Π} ‖π‖_q; for q < ∞ without vertices, the bound from max |π_r|.
  double max_norm(Norm q) const {
    if (q == Norm::kLInf) return norm(coordinate_bound_, Norm::kLInf);
    if (enumerated_) {
      double best = 0.0;
      for (const auto& v : vertices_) best = std::max(best, norm(v, q));
      return best;
    }
    return norm(coordinate_bound_, q);
  }

 private:
  LinearProgram region_;
  Vector coordinate_bound_;
  std::vector<Vector> vertices_;
  bool enumerated_ = false;
};

// L(x) = max_{π∈Π} ‖π‖_q ‖T(x)‖_p with 1/p + 1/q = 1.
inline double lipschitz_L(const TwoStageProblem& p, std::span<const double> x,
                          const DualPolytope& dual) {
  return dual.max_norm(dual_norm(p.norm())) *
         operator_norm_bound(eval_T(p.uncertainty(), x), p.norm());
}

inline double lipschitz_L(const TwoStageProblem& p, std::span<const double> x) {
  return lipschitz_L(p, x, DualPolytope(p));
}

// L̄ >= max_{x∈X} L(x), via the triangle inequality over T0 and the T^(i).
inline double lambda_upper_bound(const TwoStageProblem& p, const DualPolytope& dual) {
  const auto& map = p.uncertainty();
  const auto& f = p.first_stage();
  double t = operator_norm_bound(map.t0, p.norm());
  for (std::size_t i = 0; i < map.t_list.size(); ++i)
    t += std::max(std::abs(f.lower[i]), std::abs(f.upper[i])) *
         operator_norm_bound(map.t_list[i], p.norm());
  return dual.max_norm(dual_norm(p.norm())) * t;
}

inline double lambda_upper_bound(const TwoStageProblem& p) {
  return lambda_upper_bound(p, DualPolytope(p));
}

}  // namespace wdro
