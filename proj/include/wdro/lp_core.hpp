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

// Dense LP kernel.
//
// solve_lp() is a two-phase primal simplex on a dense tableau. Variables are
// mapped to a nonnegative standard form (shift by a finite lower bound, negate
// against a finite upper bound, or split when free); doubly bounded variables
// get an explicit "x' <= ub - lb" row. Pricing is Dantzig's rule, and after
// `degenerate_trip` consecutive degenerate pivots the solver switches to
// Bland's rule until a pivot makes progress again. Everything is deterministic
// for identical inputs.
//
// Duals follow the "d objective / d rhs" convention for a minimization: a
// binding <= row has a nonpositive multiplier, a binding >= row a nonnegative
// one.
//
// enumerate_vertices() lists the extreme points of a bounded polyhedron by a
// depth-first walk over feasible bases, where neighbours differ by a single
// simplex pivot (all tie-breaking leaving rows are explored, so degenerate
// vertices are traversed completely).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wdro/error.hpp"
#include "wdro/linalg.hpp"

namespace wdro {

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

struct LinearProgram {
  Vector objective;             // minimized
  Matrix matrix;                // rows x cols
  std::vector<RowSense> senses;
  Vector rhs;
  Vector lower;                 // may be -kInf
  Vector upper;                 // may be +kInf

  std::size_t num_rows() const noexcept { return rhs.size(); }
  std::size_t num_cols() const noexcept { return objective.size(); }
};

// Throws MalformedProblem when the type invariants do not hold.
inline void validate(const LinearProgram& lp) {
  const std::size_t m = lp.rhs.size();
  const std::size_t n = lp.objective.size();
  require(lp.senses.size() == m, ErrorCode::kMalformedProblem, "sense count != rhs length");
  require(m == 0 || lp.matrix.rows() == m, ErrorCode::kMalformedProblem,
          "matrix rows != rhs length");
  require(m == 0 || lp.matrix.cols() == n, ErrorCode::kMalformedProblem,
          "matrix cols != objective length");
  require(lp.lower.size() == n && lp.upper.size() == n, ErrorCode::kMalformedProblem,
          "bound vectors must match objective length");
  for (std::size_t j = 0; j < n; ++j) {
    require(std::isfinite(lp.objective[j]), ErrorCode::kMalformedProblem, "non-finite cost");
    require(!std::isnan(lp.lower[j]) && !std::isnan(lp.upper[j]) && lp.lower[j] != kInf &&
                lp.upper[j] != -kInf && lp.lower[j] <= lp.upper[j],
            ErrorCode::kMalformedProblem, "bad bounds on variable " + std::to_string(j));
  }
  for (std::size_t i = 0; i < m; ++i)
    require(std::isfinite(lp.rhs[i]), ErrorCode::kMalformedProblem, "non-finite rhs");
  for (double v : lp.matrix.data())
    require(std::isfinite(v), ErrorCode::kMalformedProblem, "non-finite matrix entry");
}

// Incremental sparse construction of a LinearProgram.
class LpBuilder {
 public:
  std::size_t add_variable(double cost, double lower, double upper) {
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    return cost_.size() - 1;
  }

  std::size_t add_row(std::vector<std::pair<std::size_t, double>> terms, RowSense sense,
                      double rhs) {
    rows_.push_back(std::move(terms));
    senses_.push_back(sense);
    rhs_.push_back(rhs);
    return rhs_.size() - 1;
  }

  std::size_t num_variables() const noexcept { return cost_.size(); }
  std::size_t num_rows() const noexcept { return rhs_.size(); }
  void set_cost(std::size_t j, double cost) { cost_[j] = cost; }

  LinearProgram build() const {
    LinearProgram lp;
    lp.objective = cost_;
    lp.lower = lower_;
    lp.upper = upper_;
    lp.senses = senses_;
    lp.rhs = rhs_;
    lp.matrix = Matrix(rhs_.size(), cost_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i)
      for (const auto& [j, v] : rows_[i]) {
        require(j < cost_.size(), ErrorCode::kMalformedProblem, "row references unknown column");
        lp.matrix(i, j) += v;
      }
    return lp;
  }

 private:
  Vector cost_, lower_, upper_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
  std::vector<RowSense> senses_;
  Vector rhs_;
};

struct LpOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-8;
  double pivot_tol = 1e-10;
  int degenerate_trip = 50;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Vector primal;
  Vector dual;            // one multiplier per row
  Vector reduced_costs;   // c - Aᵀ dual
  double objective = 0.0;
  std::optional<Vector> ray;  // improving recession direction when unbounded
  int iterations = 0;
};

namespace detail {

// How an original variable maps onto nonnegative standard-form columns.
struct ColumnMap {
  enum class Kind { kShift, kNegate, kFree } kind = Kind::kShift;
  std::size_t col = 0;
  std::size_t col_neg = 0;  // only for kFree
  double offset = 0.0;      // lb for kShift, ub for kNegate
};

// min cᵀz s.t. A z = b, z >= 0 with b >= 0, plus the bookkeeping needed to map
// solutions back. Columns: structural, then slack/surplus.
struct StandardForm {
  std::size_t num_structural = 0;
  std::size_t num_cols = 0;
  std::vector<Vector> rows;      // dense, length num_cols
  Vector rhs;
  Vector cost;                   // length num_cols
  std::vector<int> flip;         // +1 / -1 applied to each row
  std::vector<long> slack_col;   // slack column per row, -1 if none
  std::vector<ColumnMap> maps;   // per original variable
  std::size_t num_original_rows = 0;
};

inline StandardForm make_standard_form(const LinearProgram& lp, const Vector* lower_override) {
  StandardForm sf;
  const std::size_t n = lp.num_cols();
  const std::size_t m = lp.num_rows();
  sf.maps.resize(n);
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (std col, ub - lb)
  std::size_t col = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lower_override ? (*lower_override)[j] : lp.lower[j];
    const double hi = lp.upper[j];
    auto& map = sf.maps[j];
    if (std::isfinite(lo)) {
      map.kind = ColumnMap::Kind::kShift;
      map.col = col++;
      map.offset = lo;
      if (std::isfinite(hi)) bound_rows.emplace_back(map.col, hi - lo);
    } else if (std::isfinite(hi)) {
      map.kind = ColumnMap::Kind::kNegate;
      map.col = col++;
      map.offset = hi;
    } else {
      map.kind = ColumnMap::Kind::kFree;
      map.col = col++;
      map.col_neg = col++;
    }
  }
  sf.num_structural = col;
  const std::size_t total_rows = m + bound_rows.size();
  std::size_t num_slacks = bound_rows.size();
  for (std::size_t i = 0; i < m; ++i)
    if (lp.senses[i] != RowSense::kEqual) ++num_slacks;
  sf.num_cols = col + num_slacks;
  sf.rows.assign(total_rows, Vector(sf.num_cols, 0.0));
  sf.rhs.assign(total_rows, 0.0);
  sf.flip.assign(total_rows, 1);
  sf.slack_col.assign(total_rows, -1);
  sf.cost.assign(sf.num_cols, 0.0);
  sf.num_original_rows = m;

  for (std::size_t j = 0; j < n; ++j) {
    const auto& map = sf.maps[j];
    switch (map.kind) {
      case ColumnMap::Kind::kShift: sf.cost[map.col] = lp.objective[j]; break;
      case ColumnMap::Kind::kNegate: sf.cost[map.col] = -lp.objective[j]; break;
      case ColumnMap::Kind::kFree:
        sf.cost[map.col] = lp.objective[j];
        sf.cost[map.col_neg] = -lp.objective[j];
        break;
    }
  }

  std::size_t next_slack = col;
  for (std::size_t i = 0; i < m; ++i) {
    auto& row = sf.rows[i];
    double b = lp.rhs[i];
    auto src = lp.matrix.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = src[j];
      if (a == 0.0) continue;
      const auto& map = sf.maps[j];
      switch (map.kind) {
        case ColumnMap::Kind::kShift:
          row[map.col] += a;
          b -= a * map.offset;
          break;
        case ColumnMap::Kind::kNegate:
          row[map.col] -= a;
          b -= a * map.offset;
          break;
        case ColumnMap::Kind::kFree:
          row[map.col] += a;
          row[map.col_neg] -= a;
          break;
      }
    }
    if (lp.senses[i] == RowSense::kLessEqual) {
      row[next_slack] = 1.0;
      sf.slack_col[i] = static_cast<long>(next_slack++);
    } else if (lp.senses[i] == RowSense::kGreaterEqual) {
      row[next_slack] = -1.0;
      sf.slack_col[i] = static_cast<long>(next_slack++);
    }
    sf.rhs[i] = b;
  }
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const std::size_t i = m + k;
    sf.rows[i][bound_rows[k].first] = 1.0;
    sf.rows[i][next_slack] = 1.0;
    sf.slack_col[i] = static_cast<long>(next_slack++);
    sf.rhs[i] = bound_rows[k].second;
  }
  for (std::size_t i = 0; i < total_rows; ++i) {
    if (sf.rhs[i] < 0.0) {
      sf.flip[i] = -1;
      sf.rhs[i] = -sf.rhs[i];
      for (double& v : sf.rows[i]) v = -v;
    }
  }
  return sf;
}

inline Vector map_to_original(const StandardForm& sf, const Vector& z, bool is_direction) {
  Vector x(sf.maps.size(), 0.0);
  for (std::size_t j = 0; j < sf.maps.size(); ++j) {
    const auto& map = sf.maps[j];
    switch (map.kind) {
      case ColumnMap::Kind::kShift: x[j] = (is_direction ? 0.0 : map.offset) + z[map.col]; break;
      case ColumnMap::Kind::kNegate: x[j] = (is_direction ? 0.0 : map.offset) - z[map.col]; break;
      case ColumnMap::Kind::kFree: x[j] = z[map.col] - z[map.col_neg]; break;
    }
  }
  return x;
}

// Dense simplex tableau over a StandardForm, optionally extended with one
// artificial column per row that has no usable +1 slack.
class Tableau {
 public:
  enum class Outcome { kOptimal, kUnbounded, kIterationLimit };

  Tableau(const StandardForm& sf, bool with_artificials, const LpOptions& options)
      : options_(options), m_(sf.rows.size()), sf_(&sf) {
    num_real_ = sf.num_cols;
    basis_.assign(m_, 0);
    init_col_.assign(m_, 0);
    std::vector<long> art_for_row(m_, -1);
    std::size_t ncols = num_real_;
    if (with_artificials) {
      for (std::size_t i = 0; i < m_; ++i) {
        const long s = sf.slack_col[i];
        if (s >= 0 && sf.rows[i][static_cast<std::size_t>(s)] == 1.0) continue;
        art_for_row[i] = static_cast<long>(ncols++);
      }
    }
    ncols_ = ncols;
    a_ = Matrix(m_, ncols_);
    beta_ = sf.rhs;
    for (double b : beta_) scale_ = std::max(scale_, std::abs(b));
    for (std::size_t i = 0; i < m_; ++i) {
      std::copy(sf.rows[i].begin(), sf.rows[i].end(), a_.row(i).begin());
      if (with_artificials) {
        if (art_for_row[i] >= 0) {
          a_(i, static_cast<std::size_t>(art_for_row[i])) = 1.0;
          artificials_.emplace_back(static_cast<std::size_t>(art_for_row[i]), i);
          basis_[i] = static_cast<std::size_t>(art_for_row[i]);
        } else {
          basis_[i] = static_cast<std::size_t>(sf.slack_col[i]);
        }
        init_col_[i] = basis_[i];
      }
    }
    is_basic_.assign(ncols_, 0);
    for (std::size_t i = 0; i < m_ && with_artificials; ++i) is_basic_[basis_[i]] = 1;
  }

  // Re-expresses [A | b] in terms of an explicit basis by Gauss-Jordan
  // elimination. Returns false when the chosen columns are singular.
  bool load_basis(const StandardForm& sf, const std::vector<std::size_t>& basis) {
    for (std::size_t i = 0; i < m_; ++i) {
      auto row = a_.row(i);
      std::copy(sf.rows[i].begin(), sf.rows[i].end(), row.begin());
      std::fill(row.begin() + static_cast<std::ptrdiff_t>(sf.rows[i].size()), row.end(), 0.0);
      beta_[i] = sf.rhs[i];
    }
    for (const auto& [col, row] : artificials_) a_(row, col) = 1.0;
    std::vector<char> used(m_, 0);
    std::vector<std::size_t> row_of(basis.size());
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const std::size_t c = basis[k];
      std::size_t best = m_;
      double best_abs = 1e-11;
      for (std::size_t i = 0; i < m_; ++i) {
        if (used[i]) continue;
        if (std::abs(a_(i, c)) > best_abs) {
          best_abs = std::abs(a_(i, c));
          best = i;
        }
      }
      if (best == m_) return false;
      used[best] = 1;
      row_of[k] = best;
      eliminate(best, c);
    }
    std::fill(is_basic_.begin(), is_basic_.end(), 0);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      basis_[row_of[k]] = basis[k];
      is_basic_[basis[k]] = 1;
    }
    return true;
  }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return ncols_; }
  std::size_t num_real() const noexcept { return num_real_; }
  bool is_artificial(std::size_t j) const noexcept { return j >= num_real_; }
  const std::vector<std::size_t>& basis() const noexcept { return basis_; }
  std::size_t init_col(std::size_t i) const noexcept { return init_col_[i]; }
  double entry(std::size_t i, std::size_t j) const { return a_(i, j); }
  double value(std::size_t i) const { return beta_[i]; }
  double reduced_cost(std::size_t j) const { return d_[j]; }
  double objective() const noexcept { return z_; }
  bool is_basic(std::size_t j) const { return is_basic_[j] != 0; }

  void set_costs(const Vector& cost) {
    cost_ = cost;
    cost_.resize(ncols_, 0.0);
    d_ = cost_;
    z_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      auto row = a_.row(i);
      for (std::size_t j = 0; j < ncols_; ++j) d_[j] -= cb * row[j];
      z_ += cb * beta_[i];
    }
  }

  void pivot(std::size_t r, std::size_t e) {
    is_basic_[basis_[r]] = 0;
    eliminate(r, e);
    if (!d_.empty()) {
      const double f = d_[e];
      if (f != 0.0) {
        auto prow = a_.row(r);
        for (std::size_t j = 0; j < ncols_; ++j) d_[j] -= f * prow[j];
        z_ += f * beta_[r];
      }
      d_[e] = 0.0;
    }
    basis_[r] = e;
    is_basic_[e] = 1;
  }

  // Rebuilds the tableau from the original rows for the current basis, which
  // discards the rounding error accumulated by repeated pivots.
  bool refactor() {
    const std::vector<std::size_t> basis = basis_;
    const Vector cost = cost_;
    if (!load_basis(*sf_, basis)) return false;
    if (!cost.empty()) set_costs(cost);
    return true;
  }

  double min_value() const {
    double m = 0.0;
    for (double b : beta_) m = std::min(m, b);
    return m;
  }

  // Harris two-pass ratio test: the step may overshoot a bound by `delta`,
  // and among rows inside that step the largest pivot leaves. Pivots must be
  // large relative to the column.
  std::optional<std::size_t> harris_row(std::size_t e) const {
    double colmax = 0.0;
    for (std::size_t i = 0; i < m_; ++i) colmax = std::max(colmax, std::abs(a_(i, e)));
    const double ptol = options_.pivot_tol * std::max(1.0, colmax);
    const double delta = 1e-9 * scale_;
    double theta = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = a_(i, e);
      if (a > ptol) theta = std::min(theta, (std::max(beta_[i], 0.0) + delta) / a);
    }
    if (!std::isfinite(theta)) return std::nullopt;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = a_(i, e);
      if (a > ptol && std::max(beta_[i], 0.0) / a <= theta && (!best || a > a_(*best, e)))
        best = i;
    }
    return best;
  }

  // Dual simplex pivots from an optimal basis until no basic value is below
  // zero, which removes the bound overshoot left by the Harris ratio test.
  // Returns the number of pivots, or -1 if some row has no dual ratio.
  int dual_cleanup(const std::vector<char>& blocked, int& iterations, int cap) {
    int pivots = 0;
    const double tol = 1e-12 * scale_;
    while (true) {
      std::size_t r = m_;
      double worst = -tol;
      for (std::size_t i = 0; i < m_; ++i)
        if (beta_[i] < worst) {
          worst = beta_[i];
          r = i;
        }
      if (r == m_) return pivots;
      if (iterations >= cap) return -1;
      double rowmax = 0.0;
      for (std::size_t j = 0; j < ncols_; ++j) rowmax = std::max(rowmax, std::abs(a_(r, j)));
      const double ptol = options_.pivot_tol * std::max(1.0, rowmax);
      std::size_t e = ncols_;
      double best = kInf;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (blocked[j] || is_basic_[j]) continue;
        const double a = a_(r, j);
        if (a >= -ptol) continue;
        const double ratio = std::max(d_[j], 0.0) / -a;
        if (ratio < best || (ratio == best && a < a_(r, e))) {
          best = ratio;
          e = j;
        }
      }
      if (e == ncols_) return -1;
      pivot(r, e);
      ++iterations;
      ++pivots;
    }
  }

  // Minimum-ratio rows for entering column e (rows within a relative tie).
  std::vector<std::size_t> ratio_ties(std::size_t e) const {
    double best = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = a_(i, e);
      if (a > options_.pivot_tol) best = std::min(best, std::max(beta_[i], 0.0) / a);
    }
    std::vector<std::size_t> ties;
    if (!std::isfinite(best)) return ties;
    const double slack = 1e-11 * (1.0 + best);
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = a_(i, e);
      if (a > options_.pivot_tol && std::max(beta_[i], 0.0) / a <= best + slack) ties.push_back(i);
    }
    return ties;
  }

  // Runs primal simplex iterations with the current costs. Columns flagged in
  // `blocked` never enter. On kUnbounded, `unbounded_col` is the entering
  // column without a ratio-test row.
  Outcome optimize(const std::vector<char>& blocked, int& iterations, int cap,
                   std::size_t& unbounded_col) {
    int degenerate_run = 0;
    bool bland = false;
    while (true) {
      std::size_t e = ncols_;
      double best = -options_.opt_tol;
      for (std::size_t j = 0; j < ncols_; ++j) {
        if (blocked[j] || is_basic_[j]) continue;
        if (d_[j] < best) {
          best = d_[j];
          e = j;
          if (bland) break;
        }
      }
      if (e == ncols_) return Outcome::kOptimal;
      if (iterations >= cap) return Outcome::kIterationLimit;
      std::size_t r = 0;
      if (bland) {
        auto ties = ratio_ties(e);
        if (ties.empty()) {
          unbounded_col = e;
          return Outcome::kUnbounded;
        }
        r = ties.front();
        for (std::size_t i : ties)
          if (basis_[i] < basis_[r]) r = i;
      } else {
        const auto row = harris_row(e);
        if (!row) {
          unbounded_col = e;
          return Outcome::kUnbounded;
        }
        r = *row;
      }
      const double step = std::max(beta_[r], 0.0) / a_(r, e);
      pivot(r, e);
      ++iterations;
      if (++since_refactor_ >= kRefactorInterval) {
        since_refactor_ = 0;
        refactor();
      }
      if (step <= 1e-12) {
        if (++degenerate_run >= options_.degenerate_trip) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

 private:
  void eliminate(std::size_t r, std::size_t e) {
    auto prow = a_.row(r);
    const double inv = 1.0 / prow[e];
    for (std::size_t j = 0; j < ncols_; ++j) prow[j] *= inv;
    prow[e] = 1.0;
    beta_[r] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      auto row = a_.row(i);
      const double f = row[e];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < ncols_; ++j) row[j] -= f * prow[j];
      row[e] = 0.0;
      beta_[i] -= f * beta_[r];
      if (std::abs(beta_[i]) < 1e-13) beta_[i] = 0.0;
    }
  }

  static constexpr int kRefactorInterval = 64;

  LpOptions options_;
  std::size_t m_ = 0;
  const StandardForm* sf_ = nullptr;
  std::vector<std::pair<std::size_t, std::size_t>> artificials_;  // (column, row)
  double scale_ = 1.0;
  int since_refactor_ = 0;
  std::size_t num_real_ = 0;
  std::size_t ncols_ = 0;
  Matrix a_;
  Vector beta_;
  Vector cost_;
  Vector d_;
  double z_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> init_col_;
  std::vector<char> is_basic_;
};

inline double rhs_scale(const StandardForm& sf) {
  double s = 1.0;
  for (double b : sf.rhs) s = std::max(s, std::abs(b));
  return s;
}

// Phase 1 followed by eviction of artificials still in the basis. Returns
// false when the region is empty. Rows whose artificial cannot be evicted are
// linearly redundant and reported in `redundant_rows`.
inline bool find_feasible_basis(const StandardForm& sf, Tableau& tab, const LpOptions& options,
                                int& iterations, int cap, std::vector<std::size_t>* redundant_rows) {
  Vector phase1(tab.cols(), 0.0);
  bool any_art = false;
  for (std::size_t j = tab.num_real(); j < tab.cols(); ++j) {
    phase1[j] = 1.0;
    any_art = true;
  }
  if (!any_art) return true;
  tab.set_costs(phase1);
  std::vector<char> blocked(tab.cols(), 0);
  std::size_t unused = 0;
  const auto outcome = tab.optimize(blocked, iterations, cap, unused);
  if (outcome == Tableau::Outcome::kIterationLimit)
    fail(ErrorCode::kNumericalBreakdown, "phase 1 exceeded the iteration cap");
  if (tab.objective() > options.feas_tol * rhs_scale(sf)) return false;
  for (std::size_t i = 0; i < tab.rows(); ++i) {
    if (!tab.is_artificial(tab.basis()[i])) continue;
    std::size_t best = tab.cols();
    double best_abs = options.pivot_tol;
    for (std::size_t j = 0; j < tab.num_real(); ++j) {
      if (tab.is_basic(j)) continue;
      if (std::abs(tab.entry(i, j)) > best_abs) {
        best_abs = std::abs(tab.entry(i, j));
        best = j;
      }
    }
    if (best < tab.cols()) {
      tab.pivot(i, best);
    } else if (redundant_rows) {
      redundant_rows->push_back(i);
    }
  }
  return true;
}

}  // namespace detail

// Largest bound or row violation of a point.
inline double primal_residual(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double ax = dot(lp.matrix.row(i), x);
    switch (lp.senses[i]) {
      case RowSense::kLessEqual: worst = std::max(worst, ax - lp.rhs[i]); break;
      case RowSense::kGreaterEqual: worst = std::max(worst, lp.rhs[i] - ax); break;
      case RowSense::kEqual: worst = std::max(worst, std::abs(ax - lp.rhs[i])); break;
    }
  }
  return worst;
}

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {}) {
  validate(lp);
  const auto sf = detail::make_standard_form(lp, nullptr);
  detail::Tableau tab(sf, /*with_artificials=*/true, options);
  const int cap = static_cast<int>(50 * (tab.rows() + tab.cols()));
  LpSolution sol;
  if (!detail::find_feasible_basis(sf, tab, options, sol.iterations, cap, nullptr)) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }
  tab.set_costs(sf.cost);
  std::vector<char> blocked(tab.cols(), 0);
  for (std::size_t j = tab.num_real(); j < tab.cols(); ++j) blocked[j] = 1;
  std::size_t entering = 0;
  const double scale = detail::rhs_scale(sf);
  auto outcome = detail::Tableau::Outcome::kOptimal;
  Vector z;
  // An optimal basis is refactored and cleaned of Harris overshoot by dual
  // pivots, then checked against the original rows; on a residual failure the
  // basis is refactored and the iterations resume once.
  int attempt = 0, cleanups = 0;
  while (true) {
    outcome = tab.optimize(blocked, sol.iterations, cap, entering);
    if (outcome == detail::Tableau::Outcome::kIterationLimit)
      fail(ErrorCode::kNumericalBreakdown,
           "simplex exceeded the iteration cap of " + std::to_string(cap));
    if (outcome == detail::Tableau::Outcome::kOptimal && cleanups < 3 && tab.refactor() &&
        tab.min_value() < 0.0 && tab.dual_cleanup(blocked, sol.iterations, cap) > 0) {
      ++cleanups;
      continue;
    }
    z.assign(tab.num_real(), 0.0);
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const std::size_t b = tab.basis()[i];
      if (b < tab.num_real()) z[b] = std::max(tab.value(i), 0.0);
    }
    sol.primal = detail::map_to_original(sf, z, false);
    if (outcome != detail::Tableau::Outcome::kOptimal ||
        primal_residual(lp, sol.primal) <= 1e-6 * scale)
      break;
    if (attempt++ == 1 || !tab.refactor() || tab.min_value() < -1e-7 * scale)
      fail(ErrorCode::kNumericalBreakdown, "simplex lost feasibility to rounding error");
  }
  sol.objective = dot(lp.objective, sol.primal);

  if (outcome == detail::Tableau::Outcome::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    Vector dz(tab.num_real(), 0.0);
    dz[entering] = 1.0;
    for (std::size_t i = 0; i < tab.rows(); ++i) {
      const std::size_t b = tab.basis()[i];
      if (b < tab.num_real()) dz[b] = -tab.entry(i, entering);
    }
    sol.ray = detail::map_to_original(sf, dz, true);
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.dual.assign(lp.num_rows(), 0.0);
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const double y = -tab.reduced_cost(tab.init_col(i));
    sol.dual[i] = sf.flip[i] * y + 0.0;
  }
  sol.reduced_costs = lp.objective;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    if (sol.dual[i] == 0.0) continue;
    auto row = lp.matrix.row(i);
    for (std::size_t j = 0; j < lp.num_cols(); ++j) sol.reduced_costs[j] -= sol.dual[i] * row[j];
  }
  return sol;
}

// Dual objective bᵀy + Σ_j (reduced cost at the bound it prices against).
// Equals the primal objective at an optimal pair.
inline double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double v = dot(lp.rhs, sol.dual);
  for (std::size_t j = 0; j < lp.num_cols(); ++j) {
    const double d = sol.reduced_costs[j];
    if (d > 0.0 && std::isfinite(lp.lower[j])) v += d * lp.lower[j];
    else if (d < 0.0 && std::isfinite(lp.upper[j])) v += d * lp.upper[j];
    else if (d != 0.0) v += d * sol.primal[j];
  }
  return v;
}

struct VertexOptions {
  double dedup_tol = 1e-7;
  std::size_t max_dimension = 12;
  std::size_t max_bases = 200000;
  LpOptions lp;
};

// All vertices of the (bounded) feasible region of `region`; its objective is
// ignored. Sorted lexicographically.
inline std::vector<Vector> enumerate_vertices(const LinearProgram& region,
                                              const VertexOptions& options = {}) {
  validate(region);
  const std::size_t n = region.num_cols();
  require(n <= options.max_dimension, ErrorCode::kDimensionTooLarge,
          "vertex enumeration over " + std::to_string(n) + " variables exceeds the cap of " +
              std::to_string(options.max_dimension));
  std::vector<Vector> vertices;
  if (n == 0) return vertices;

  // Per-coordinate LPs certify boundedness and give finite shifts.
  Vector lower(n), upper(n);
  LinearProgram probe = region;
  for (std::size_t j = 0; j < n; ++j) {
    for (int sign : {1, -1}) {
      std::fill(probe.objective.begin(), probe.objective.end(), 0.0);
      probe.objective[j] = sign;
      const auto sol = solve_lp(probe, options.lp);
      if (sol.status == LpStatus::kInfeasible) return vertices;
      if (sol.status == LpStatus::kUnbounded)
        fail(ErrorCode::kRegionUnbounded,
             "region is unbounded along coordinate " + std::to_string(j));
      (sign > 0 ? lower : upper)[j] = sol.primal[j];
    }
  }

  auto sf = detail::make_standard_form(region, &lower);
  // Drop linearly dependent rows so every basis has exactly `rows` columns.
  {
    std::vector<Vector> work = sf.rows;
    std::vector<std::size_t> keep;
    std::vector<char> pivoted(sf.num_cols, 0);
    for (std::size_t i = 0; i < work.size(); ++i) {
      std::size_t p = sf.num_cols;
      double best = 1e-9;
      for (std::size_t j = 0; j < sf.num_cols; ++j)
        if (std::abs(work[i][j]) > best) {
          best = std::abs(work[i][j]);
          p = j;
        }
      if (p == sf.num_cols) continue;
      keep.push_back(i);
      for (std::size_t k = i + 1; k < work.size(); ++k) {
        const double f = work[k][p] / work[i][p];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < sf.num_cols; ++j) work[k][j] -= f * work[i][j];
      }
    }
    if (keep.size() != sf.rows.size()) {
      detail::StandardForm reduced = sf;
      reduced.rows.clear();
      reduced.rhs.clear();
      reduced.flip.clear();
      reduced.slack_col.clear();
      for (std::size_t i : keep) {
        reduced.rows.push_back(sf.rows[i]);
        reduced.rhs.push_back(sf.rhs[i]);
        reduced.flip.push_back(sf.flip[i]);
        reduced.slack_col.push_back(sf.slack_col[i]);
      }
      sf = std::move(reduced);
    }
  }

  std::vector<std::size_t> start;
  {
    detail::Tableau tab(sf, true, options.lp);
    int iterations = 0;
    const int cap = static_cast<int>(50 * (tab.rows() + tab.cols()));
    if (!detail::find_feasible_basis(sf, tab, options.lp, iterations, cap, nullptr))
      return vertices;
    for (std::size_t b : tab.basis()) {
      require(b < sf.num_cols, ErrorCode::kNumericalBreakdown,
              "could not evict an artificial from the starting basis");
      start.push_back(b);
    }
  }

  detail::Tableau tab(sf, false, options.lp);
  std::set<std::vector<std::size_t>> seen;
  std::set<std::vector<char>> seen_vertex;
  std::vector<std::vector<std::size_t>> stack;
  std::sort(start.begin(), start.end());
  stack.push_back(start);
  seen.insert(start);
  const double zero_tol = options.dedup_tol * 1e-2;
  while (!stack.empty()) {
    auto basis = std::move(stack.back());
    stack.pop_back();
    if (!tab.load_basis(sf, basis)) continue;
    Vector z(sf.num_cols, 0.0);
    for (std::size_t i = 0; i < tab.rows(); ++i) z[tab.basis()[i]] = std::max(tab.value(i), 0.0);
    std::vector<char> signature(sf.num_cols);
    for (std::size_t j = 0; j < sf.num_cols; ++j) signature[j] = z[j] <= zero_tol ? 1 : 0;
    if (seen_vertex.insert(signature).second)
      vertices.push_back(detail::map_to_original(sf, z, false));
    for (std::size_t e = 0; e < sf.num_cols; ++e) {
      if (tab.is_basic(e)) continue;
      for (std::size_t r : tab.ratio_ties(e)) {
        auto next = tab.basis();
        next[r] = e;
        std::sort(next.begin(), next.end());
        if (seen.insert(next).second) {
          require(seen.size() <= options.max_bases, ErrorCode::kDimensionTooLarge,
                  "vertex enumeration visited more than " + std::to_string(options.max_bases) +
                      " bases");
          stack.push_back(std::move(next));
        }
      }
    }
  }

  std::sort(vertices.begin(), vertices.end());
  std::vector<Vector> unique;
  for (auto& v : vertices) {
    bool duplicate = false;
    for (const auto& u : unique)
      if (max_abs_diff(u, v) <= options.dedup_tol) {
        duplicate = true;
        break;
      }
    if (!duplicate) unique.push_back(std::move(v));
  }
  return unique;
}

// Plain-text dump used for triage:
//   wdro-lp 1
//   vars <n> rows <m>
//   obj <c_1> ... <c_n>
//   lb <l_1> ... ; ub <u_1> ...      (inf / -inf for infinite bounds)
//   row <L|E|G> <rhs> <nnz> <col>:<coef> ...
inline void write_lp_text(std::ostream& out, const LinearProgram& lp) {
  auto num = [](double v) {
    if (v == kInf) return std::string("inf");
    if (v == -kInf) return std::string("-inf");
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  out << "wdro-lp 1\n";
  out << "vars " << lp.num_cols() << " rows " << lp.num_rows() << "\n";
  out << "obj";
  for (double c : lp.objective) out << ' ' << num(c);
  out << "\nlb";
  for (double v : lp.lower) out << ' ' << num(v);
  out << "\nub";
  for (double v : lp.upper) out << ' ' << num(v);
  out << "\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const char s = lp.senses[i] == RowSense::kLessEqual ? 'L'
                   : lp.senses[i] == RowSense::kEqual   ? 'E'
                                                        : 'G';
    std::size_t nnz = 0;
    for (double v : lp.matrix.row(i)) nnz += v != 0.0;
    out << "row " << s << ' ' << num(lp.rhs[i]) << ' ' << nnz;
    for (std::size_t j = 0; j < lp.num_cols(); ++j)
      if (lp.matrix(i, j) != 0.0) out << ' ' << j << ':' << num(lp.matrix(i, j));
    out << "\n";
  }
}

inline LinearProgram read_lp_text(std::istream& in) {
  auto parse_num = [](const std::string& t) {
    if (t == "inf") return kInf;
    if (t == "-inf") return -kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      fail(ErrorCode::kParseError, "bad number '" + t + "'");
    }
    require(used == t.size(), ErrorCode::kParseError, "bad number '" + t + "'");
    return v;
  };
  std::string tok;
  std::size_t n = 0, m = 0;
  in >> tok;
  require(tok == "wdro-lp", ErrorCode::kParseError, "missing wdro-lp header");
  in >> tok;
  in >> tok >> n >> tok >> m;
  require(static_cast<bool>(in), ErrorCode::kParseError, "bad size line");
  LinearProgram lp;
  auto read_vec = [&](const char* key, Vector& v) {
    in >> tok;
    require(tok == key, ErrorCode::kParseError, std::string("expected ") + key);
    v.resize(n);
    for (auto& x : v) {
      in >> tok;
      x = parse_num(tok);
    }
  };
  read_vec("obj", lp.objective);
  read_vec("lb", lp.lower);
  read_vec("ub", lp.upper);
  lp.matrix = Matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t nnz = 0;
    char s = 0;
    in >> tok >> s >> tok;
    lp.rhs.push_back(parse_num(tok));
    lp.senses.push_back(s == 'L' ? RowSense::kLessEqual
                        : s == 'E' ? RowSense::kEqual
                                   : RowSense::kGreaterEqual);
    in >> nnz;
    for (std::size_t k = 0; k < nnz; ++k) {
      in >> tok;
      const auto colon = tok.find(':');
      require(colon != std::string::npos, ErrorCode::kParseError, "bad entry '" + tok + "'");
      lp.matrix(i, std::stoul(tok.substr(0, colon))) = parse_num(tok.substr(colon + 1));
    }
    require(static_cast<bool>(in), ErrorCode::kParseError, "truncated row " + std::to_string(i));
  }
  return lp;
}

}  // namespace wdro
