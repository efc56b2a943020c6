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

// Data model of a two-stage distributionally robust LP:
//
//   min  cᵀx + sup_{P ∈ B_ε(P̂_N)} E_P[ Z(x, ξ) ]     x ∈ X = {lb <= x <= ub, Ax = b}
//   Z(x, ξ) = min { qᵀy : W y (>= | =) h(x) + T(x) ξ, y >= 0 }
//
// with h(x) = h0 + H x, T(x) = T0 + Σ_i x_i T^(i), a box support Ξ for ξ and a
// 1-Wasserstein ball of radius ε (ground norm l1, l2 or l∞) around the
// empirical distribution of the samples.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "wdro/error.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp_core.hpp"

namespace wdro {

struct FirstStage {
  Vector cost;                 // c
  Matrix a;                    // equality rows, cols == cost.size()
  Vector b;
  Vector lower, upper;         // finite (X compact)
  std::vector<std::size_t> integer_idx;

  std::size_t dim() const noexcept { return cost.size(); }
  bool operator==(const FirstStage&) const = default;
};

// Cone tags beyond the orthant are carried for forward compatibility only.
enum class ConeKind { kNonnegativeOrthant, kSecondOrder, kSemidefinite };

// Recourse rows are ">=" by default; "=" rows have a sign-free multiplier.
enum class RecourseRow { kGreaterEqual, kEqual };

struct SecondStage {
  Vector cost;  // q
  Matrix w;     // m_y x n_y
  ConeKind cone = ConeKind::kNonnegativeOrthant;
  std::vector<RecourseRow> row_types;  // empty means all ">="

  std::size_t rows() const noexcept { return w.rows(); }
  std::size_t cols() const noexcept { return cost.size(); }
  RecourseRow row_type(std::size_t r) const {
    return row_types.empty() ? RecourseRow::kGreaterEqual : row_types[r];
  }
  bool operator==(const SecondStage&) const = default;
};

struct UncertaintyAffineMap {
  Vector h0;                 // m_y
  Matrix h;                  // m_y x n_x
  Matrix t0;                 // m_y x k
  std::vector<Matrix> t_list;  // n_x matrices m_y x k, or empty for none

  bool technology_constant() const {
    return std::all_of(t_list.begin(), t_list.end(), [](const Matrix& t) { return t.is_zero(); });
  }
  bool operator==(const UncertaintyAffineMap&) const = default;
};

// Only boxes are solved; the tag is the extension point for other convex sets.
enum class SupportKind { kBox, kConvexSet };

struct BoxSupport {
  Vector lower, upper;  // extended reals
  SupportKind kind = SupportKind::kBox;

  std::size_t dim() const noexcept { return lower.size(); }
  bool bounded() const {
    return std::all_of(lower.begin(), lower.end(), [](double v) { return std::isfinite(v); }) &&
           std::all_of(upper.begin(), upper.end(), [](double v) { return std::isfinite(v); });
  }
  bool unconstrained() const {
    return std::all_of(lower.begin(), lower.end(), [](double v) { return v == -kInf; }) &&
           std::all_of(upper.begin(), upper.end(), [](double v) { return v == kInf; });
  }
  // J₊ = {j : u_j = +∞}.
  std::vector<std::size_t> unbounded_above() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < dim(); ++j)
      if (upper[j] == kInf) out.push_back(j);
    return out;
  }
  // J₋ = {j : l_j = -∞}.
  std::vector<std::size_t> unbounded_below() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < dim(); ++j)
      if (lower[j] == -kInf) out.push_back(j);
    return out;
  }
  bool contains(std::span<const double> xi, double tol) const {
    if (xi.size() != dim()) return false;
    for (std::size_t j = 0; j < dim(); ++j)
      if (xi[j] < lower[j] - tol || xi[j] > upper[j] + tol) return false;
    return true;
  }
  bool on_boundary(std::span<const double> xi, double tol) const {
    for (std::size_t j = 0; j < dim(); ++j)
      if (std::abs(xi[j] - lower[j]) <= tol || std::abs(xi[j] - upper[j]) <= tol) return true;
    return false;
  }
  bool operator==(const BoxSupport&) const = default;
};

struct AmbiguitySet {
  std::vector<Vector> samples;  // ζ^1..ζ^N
  double epsilon = 0.0;         // radius, > 0
  Norm norm = Norm::kL1;

  std::size_t size() const noexcept { return samples.size(); }
  bool operator==(const AmbiguitySet&) const = default;
};

// Validated, immutable problem instance.
class TwoStageProblem {
 public:
  TwoStageProblem(FirstStage first, SecondStage second, UncertaintyAffineMap map,
                  BoxSupport support, AmbiguitySet ambiguity, double feas_tol = 1e-8)
      : first_(std::move(first)),
        second_(std::move(second)),
        map_(std::move(map)),
        support_(std::move(support)),
        ambiguity_(std::move(ambiguity)) {
    if (first_.a.rows() == 0) first_.a = Matrix(0, first_.dim());
    validate(feas_tol);
  }

  const FirstStage& first_stage() const noexcept { return first_; }
  const SecondStage& second_stage() const noexcept { return second_; }
  const UncertaintyAffineMap& uncertainty() const noexcept { return map_; }
  const BoxSupport& support() const noexcept { return support_; }
  const AmbiguitySet& ambiguity() const noexcept { return ambiguity_; }

  std::size_t nx() const noexcept { return first_.dim(); }
  std::size_t ny() const noexcept { return second_.cols(); }
  std::size_t my() const noexcept { return second_.rows(); }
  std::size_t k() const noexcept { return support_.dim(); }
  std::size_t num_samples() const noexcept { return ambiguity_.size(); }
  double epsilon() const noexcept { return ambiguity_.epsilon; }
  Norm norm() const noexcept { return ambiguity_.norm; }

  // Same data with a different radius or ground norm (used by sweeps).
  TwoStageProblem with_ambiguity(AmbiguitySet ambiguity) const {
    return TwoStageProblem(first_, second_, map_, support_, std::move(ambiguity));
  }
  TwoStageProblem with_first_stage_bounds(Vector lower, Vector upper) const {
    FirstStage f = first_;
    f.lower = std::move(lower);
    f.upper = std::move(upper);
    return TwoStageProblem(std::move(f), second_, map_, support_, ambiguity_);
  }

  bool operator==(const TwoStageProblem&) const = default;

 private:
  void validate(double feas_tol) const {
    const auto dim = [](std::size_t got, std::size_t want, const std::string& what) {
      require(got == want, ErrorCode::kDimensionMismatch,
              what + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
    };
    const std::size_t n = first_.dim();
    dim(first_.lower.size(), n, "first_stage.lb length");
    dim(first_.upper.size(), n, "first_stage.ub length");
    if (first_.a.rows() > 0) dim(first_.a.cols(), n, "first_stage.A columns");
    dim(first_.b.size(), first_.a.rows(), "first_stage.b length");
    for (std::size_t j = 0; j < n; ++j) {
      require(std::isfinite(first_.lower[j]) && std::isfinite(first_.upper[j]),
              ErrorCode::kInvalidArgument, "first-stage bounds must be finite (X compact)");
      require(first_.lower[j] <= first_.upper[j], ErrorCode::kInvalidArgument,
              "first-stage lb > ub at " + std::to_string(j));
      require(std::isfinite(first_.cost[j]), ErrorCode::kInvalidArgument, "non-finite c");
    }
    for (std::size_t i : first_.integer_idx)
      require(i < n, ErrorCode::kDimensionMismatch, "integer index out of range");

    const std::size_t my = second_.rows();
    const std::size_t ny = second_.cols();
    require(my > 0, ErrorCode::kInvalidArgument, "second stage needs at least one row");
    dim(second_.w.cols(), ny, "second_stage.W columns");
    if (!second_.row_types.empty()) dim(second_.row_types.size(), my, "second_stage.row_types");

    const std::size_t k = support_.dim();
    dim(support_.upper.size(), k, "support.u length");
    for (std::size_t j = 0; j < k; ++j)
      require(!std::isnan(support_.lower[j]) && !std::isnan(support_.upper[j]) &&
                  support_.lower[j] <= support_.upper[j] && support_.lower[j] != kInf &&
                  support_.upper[j] != -kInf,
              ErrorCode::kInvalidArgument, "support l > u at " + std::to_string(j));

    dim(map_.h0.size(), my, "uncertainty.h0 length");
    dim(map_.h.rows(), my, "uncertainty.H rows");
    dim(map_.h.cols(), n, "uncertainty.H columns");
    dim(map_.t0.rows(), my, "uncertainty.T0 rows");
    dim(map_.t0.cols(), k, "uncertainty.T0 columns");
    if (!map_.t_list.empty()) {
      dim(map_.t_list.size(), n, "uncertainty.T_list length");
      for (const auto& t : map_.t_list) {
        dim(t.rows(), my, "uncertainty.T_list[i] rows");
        dim(t.cols(), k, "uncertainty.T_list[i] columns");
      }
    }

    require(!ambiguity_.samples.empty(), ErrorCode::kInvalidArgument, "need at least one sample");
    require(ambiguity_.epsilon > 0.0 && std::isfinite(ambiguity_.epsilon),
            ErrorCode::kInvalidArgument, "Wasserstein radius must be positive");
    for (std::size_t i = 0; i < ambiguity_.samples.size(); ++i) {
      dim(ambiguity_.samples[i].size(), k, "sample length");
      require(support_.contains(ambiguity_.samples[i], feas_tol), ErrorCode::kInvalidArgument,
              "sample " + std::to_string(i) + " lies outside the support");
    }
  }

  FirstStage first_;
  SecondStage second_;
  UncertaintyAffineMap map_;
  BoxSupport support_;
  AmbiguitySet ambiguity_;
};

// h(x) = h0 + H x.
inline Vector eval_h(const UncertaintyAffineMap& map, std::span<const double> x) {
  require(x.size() == map.h.cols(), ErrorCode::kDimensionMismatch, "eval_h: x length");
  Vector out = map.h0;
  const Vector hx = multiply(map.h, x);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] += hx[r];
  return out;
}

// T(x) = T0 + Σ_i x_i T^(i).
inline Matrix eval_T(const UncertaintyAffineMap& map, std::span<const double> x) {
  require(x.size() == map.h.cols(), ErrorCode::kDimensionMismatch, "eval_T: x length");
  Matrix out = map.t0;
  for (std::size_t i = 0; i < map.t_list.size(); ++i) {
    if (x[i] == 0.0) continue;
    const auto& ti = map.t_list[i];
    for (std::size_t r = 0; r < out.rows(); ++r)
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += x[i] * ti(r, c);
  }
  return out;
}

// h(x) + T(x) ξ.
inline Vector recourse_rhs(const TwoStageProblem& p, std::span<const double> x,
                           std::span<const double> xi) {
  Vector rhs = eval_h(p.uncertainty(), x);
  const Vector txi = multiply(eval_T(p.uncertainty(), x), xi);
  for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] += txi[r];
  return rhs;
}

inline double default_slack_penalty(const TwoStageProblem& p) {
  double m = 1.0;
  for (double q : p.second_stage().cost) m = std::max(m, std::abs(q));
  for (double c : p.first_stage().cost) m = std::max(m, std::abs(c));
  return 1e4 * m;
}

// Adds a +e_r column per recourse row (and a -e_r column for "=" rows) at the
// given unit cost, which makes the recourse complete.
inline TwoStageProblem augment_with_slacks(const TwoStageProblem& p, double penalty) {
  require(penalty > 0.0 && std::isfinite(penalty), ErrorCode::kInvalidArgument,
          "slack penalty must be positive");
  const auto& s = p.second_stage();
  const std::size_t my = s.rows();
  std::size_t extra = 0;
  for (std::size_t r = 0; r < my; ++r) extra += s.row_type(r) == RecourseRow::kEqual ? 2 : 1;
  SecondStage aug = s;
  aug.w = Matrix(my, s.cols() + extra);
  for (std::size_t r = 0; r < my; ++r)
    for (std::size_t c = 0; c < s.cols(); ++c) aug.w(r, c) = s.w(r, c);
  std::size_t col = s.cols();
  for (std::size_t r = 0; r < my; ++r) {
    aug.w(r, col++) = 1.0;
    aug.cost.push_back(penalty);
    if (s.row_type(r) == RecourseRow::kEqual) {
      aug.w(r, col++) = -1.0;
      aug.cost.push_back(penalty);
    }
  }
  return TwoStageProblem(p.first_stage(), std::move(aug), p.uncertainty(), p.support(),
                         p.ambiguity());
}

// Π = {π : π_r >= 0 on ">=" rows, Wᵀπ <= q}, as an LP feasible region.
inline LinearProgram dual_polytope_region(const SecondStage& s) {
  LinearProgram lp;
  const std::size_t my = s.rows();
  lp.objective.assign(my, 0.0);
  lp.lower.assign(my, 0.0);
  lp.upper.assign(my, kInf);
  for (std::size_t r = 0; r < my; ++r)
    if (s.row_type(r) == RecourseRow::kEqual) lp.lower[r] = -kInf;
  lp.matrix = Matrix(s.cols(), my);
  for (std::size_t c = 0; c < s.cols(); ++c)
    for (std::size_t r = 0; r < my; ++r) lp.matrix(c, r) = s.w(r, c);
  lp.senses.assign(s.cols(), RowSense::kLessEqual);
  lp.rhs = s.cost;
  return lp;
}

// Each recourse row has a +e_r column (and a -e_r column when "=").
inline bool has_structural_complete_recourse(const SecondStage& s) {
  const std::size_t my = s.rows();
  for (std::size_t r = 0; r < my; ++r) {
    bool plus = false, minus = false;
    for (std::size_t c = 0; c < s.cols(); ++c) {
      bool unit = true;
      for (std::size_t rr = 0; rr < my && unit; ++rr)
        if (rr != r && s.w(rr, c) != 0.0) unit = false;
      if (!unit) continue;
      plus = plus || s.w(r, c) > 0.0;
      minus = minus || s.w(r, c) < 0.0;
    }
    if (!plus) return false;
    if (s.row_type(r) == RecourseRow::kEqual && !minus) return false;
  }
  return true;
}

struct AssumptionReport {
  bool complete_recourse = false;
  bool complete_recourse_structural = false;
  bool dual_feasible = false;
  bool dual_bounded = false;
  Vector dual_coordinate_bound;  // max |π_r| over Π
};

// Complete recourse (i) and dual feasibility / boundedness (ii). Throws
// AssumptionViolated naming the failing clause.
inline AssumptionReport check_assumptions(const TwoStageProblem& p,
                                          const LpOptions& options = {}) {
  AssumptionReport report;
  const auto& s = p.second_stage();
  const std::size_t my = s.rows();

  const auto region = dual_polytope_region(s);
  {
    const auto feas = solve_lp(region, options);
    report.dual_feasible = feas.status == LpStatus::kOptimal;
    if (!report.dual_feasible)
      fail(ErrorCode::kAssumptionViolated,
           "(ii) dual feasibility: {π >= 0 : Wᵀπ <= q} is empty");
  }

  report.complete_recourse_structural = has_structural_complete_recourse(s);
  if (report.complete_recourse_structural) {
    report.complete_recourse = true;
  } else {
    // {Wy : y >= 0} (+ surplus on ">=" rows) is a cone; it is all of R^m iff
    // it contains every ±e_r.
    LinearProgram feas;
    feas.objective.assign(s.cols(), 0.0);
    feas.lower.assign(s.cols(), 0.0);
    feas.upper.assign(s.cols(), kInf);
    feas.matrix = s.w;
    feas.senses.resize(my);
    for (std::size_t r = 0; r < my; ++r)
      feas.senses[r] =
          s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual : RowSense::kGreaterEqual;
    report.complete_recourse = true;
    for (std::size_t r = 0; r < my && report.complete_recourse; ++r)
      for (double sign : {1.0, -1.0}) {
        feas.rhs.assign(my, 0.0);
        feas.rhs[r] = sign;
        if (solve_lp(feas, options).status != LpStatus::kOptimal) {
          report.complete_recourse = false;
          break;
        }
      }
    if (!report.complete_recourse)
      fail(ErrorCode::kAssumptionViolated,
           "(i) complete recourse: some right-hand side admits no recourse");
  }

  report.dual_coordinate_bound.assign(my, 0.0);
  LinearProgram probe = region;
  for (std::size_t r = 0; r < my; ++r)
    for (double sign : {-1.0, 1.0}) {
      std::fill(probe.objective.begin(), probe.objective.end(), 0.0);
      probe.objective[r] = sign;
      const auto sol = solve_lp(probe, options);
      if (sol.status == LpStatus::kUnbounded)
        fail(ErrorCode::kAssumptionViolated, "(ii) dual polytope Π is unbounded");
      report.dual_coordinate_bound[r] =
          std::max(report.dual_coordinate_bound[r], std::abs(sol.primal[r]));
    }
  report.dual_bounded = true;
  return report;
}

// Rejects data the solver kernel cannot handle.
inline void require_solvable(const TwoStageProblem& p) {
  require(p.second_stage().cone == ConeKind::kNonnegativeOrthant, ErrorCode::kUnsupportedCone,
          "only the nonnegative-orthant recourse cone is solved");
  require(p.support().kind == SupportKind::kBox, ErrorCode::kUnsupportedSupport,
          "only box supports are solved");
}

}  // namespace wdro
