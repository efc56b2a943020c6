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

// Oracles for the per-sample inner problem
//
//   g_i(x, λ) = sup_{ξ∈Ξ, π∈Π} πᵀ(h(x) + T(x)ξ) - λ‖ξ - ζ^i‖_p.
//
// For a fixed π the problem in ξ is concave and, on a box, has a closed-form
// solution for each ground norm (see detail::inner_max). The exact oracle
// maximizes over ext(Π); the heuristic alternates between the recourse LP
// (π given ξ) and the closed form (ξ given π) from several starts.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "wdro/error.hpp"
#include "wdro/linalg.hpp"
#include "wdro/model.hpp"
#include "wdro/second_stage.hpp"

namespace wdro {

enum class OutcomeKind { kFinite, kUnbounded, kNoViolation, kIncomplete };

inline std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::kFinite: return "Finite";
    case OutcomeKind::kUnbounded: return "Unbounded";
    case OutcomeKind::kNoViolation: return "NoViolation";
    case OutcomeKind::kIncomplete: return "Incomplete";
  }
  return "?";
}

struct SeparationOutcome {
  OutcomeKind kind = OutcomeKind::kNoViolation;
  Vector xi;           // Finite: maximizer ξ*
  DualPoint pi;        // Finite: π*; Unbounded: the certifying π
  double value = -kInf;  // Finite: g_i value at (ξ*, π*)
  Vector ray;          // Unbounded: ‖ray‖_p = 1
  double ray_slope = 0.0;  // Unbounded: πᵀT(x)·ray
  bool exact = true;   // false when produced by the heuristic
  std::size_t evaluations = 0;
};

// Per-coordinate candidate sets {l_j, ζ_j, u_j}, finite members only.
struct CandidateGrid {
  std::vector<Vector> sets;
};

inline CandidateGrid candidate_grid(const BoxSupport& box, std::span<const double> zeta) {
  CandidateGrid g;
  for (std::size_t j = 0; j < box.dim(); ++j) {
    Vector c;
    for (double v : {box.lower[j], zeta[j], box.upper[j]})
      if (std::isfinite(v) && std::find(c.begin(), c.end(), v) == c.end()) c.push_back(v);
    std::sort(c.begin(), c.end());
    g.sets.push_back(std::move(c));
  }
  return g;
}

inline bool on_candidate_grid(std::span<const double> xi, const CandidateGrid& g, double tol) {
  for (std::size_t j = 0; j < g.sets.size(); ++j) {
    const auto& c = g.sets[j];
    if (std::none_of(c.begin(), c.end(), [&](double v) { return std::abs(v - xi[j]) <= tol; }))
      return false;
  }
  return true;
}

namespace detail {

struct InnerMax {
  bool unbounded = false;
  Vector d;            // maximizer of aᵀd - λ‖d‖ over [lo, hi]
  double gain = 0.0;   // its value (>= 0 since d = 0 is feasible)
  Vector ray;          // unbounded: unit recession direction
  double slope = 0.0;  // unbounded: aᵀray
};

// Recession-cone restriction of a: components allowed to grow without bound.
inline Vector recession_clip(std::span<const double> a, std::span<const double> lo,
                             std::span<const double> hi) {
  Vector c(a.size(), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (hi[j] == kInf && a[j] > 0.0) c[j] = a[j];
    if (lo[j] == -kInf && a[j] < 0.0) c[j] = a[j];
  }
  return c;
}

// Unit direction r in the recession cone maximizing aᵀr.
inline Vector best_ray(std::span<const double> clip, Norm p) {
  Vector r(clip.size(), 0.0);
  switch (p) {
    case Norm::kL1: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < clip.size(); ++j)
        if (std::abs(clip[j]) > std::abs(clip[best])) best = j;
      r[best] = clip[best] > 0 ? 1.0 : -1.0;
      break;
    }
    case Norm::kL2: {
      const double n = norm(clip, Norm::kL2);
      for (std::size_t j = 0; j < clip.size(); ++j) r[j] = clip[j] / n;
      break;
    }
    case Norm::kLInf:
      for (std::size_t j = 0; j < clip.size(); ++j)
        r[j] = clip[j] > 0 ? 1.0 : (clip[j] < 0 ? -1.0 : 0.0);
      break;
  }
  return r;
}

// max over d ∈ [lo, hi] of aᵀd - λ|d|_1: one three-case problem per coordinate.
inline void inner_l1(std::span<const double> a, std::span<const double> lo,
                     std::span<const double> hi, double lambda, InnerMax& out) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > lambda && std::isfinite(hi[j])) {
      out.d[j] = hi[j];
      out.gain += (a[j] - lambda) * hi[j];
    } else if (a[j] < -lambda && std::isfinite(lo[j])) {
      out.d[j] = lo[j];
      out.gain += (a[j] + lambda) * lo[j];
    }
  }
}

// max over d ∈ [lo, hi] of aᵀd - λ|d|_∞. For radius t the best linear term is
// φ(t) = Σ_j |a_j| min(cap_j, t), so the objective is concave piecewise linear
// in t with breakpoints at the caps.
inline void inner_linf(std::span<const double> a, std::span<const double> lo,
                       std::span<const double> hi, double lambda, InnerMax& out) {
  const std::size_t k = a.size();
  std::vector<std::pair<double, double>> caps;  // (cap_j, |a_j|)
  Vector cap(k, 0.0);
  double slope = -lambda;
  for (std::size_t j = 0; j < k; ++j) {
    if (a[j] == 0.0) continue;
    cap[j] = a[j] > 0 ? hi[j] : -lo[j];
    if (cap[j] <= 0.0) continue;
    caps.emplace_back(cap[j], std::abs(a[j]));
    slope += std::abs(a[j]);
  }
  std::sort(caps.begin(), caps.end());
  double t = 0.0;
  for (std::size_t idx = 0; idx < caps.size() && slope > 0.0;) {
    const double c = caps[idx].first;
    if (!std::isfinite(c)) break;
    t = c;
    while (idx < caps.size() && caps[idx].first == c) slope -= caps[idx++].second;
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (a[j] == 0.0 || cap[j] <= 0.0) continue;
    const double m = std::min(cap[j], t);
    out.d[j] = a[j] > 0 ? (m == hi[j] ? hi[j] : m) : (m == -lo[j] ? lo[j] : -m);
    out.gain += a[j] * out.d[j];
  }
  out.gain -= lambda * t;
}

// max over d ∈ [lo, hi] of aᵀd - λ|d|_2. Optimality gives d = clip(t·a) for
// some t >= 0; on each piece of that path (fixed set of clamped coordinates)
// f(t) = tA + β - λ√(t²A + C) with A = Σ_free a_j², β = Σ_clamped a_j b_j,
// C = Σ_clamped b_j², which is unimodal with stationary point √(C/(λ²-A)).
inline void inner_l2(std::span<const double> a, std::span<const double> lo,
                     std::span<const double> hi, double lambda, InnerMax& out) {
  const std::size_t k = a.size();
  std::vector<std::pair<double, std::size_t>> breaks;  // t at which j clamps
  Vector bound(k, 0.0);
  double A = 0.0, beta = 0.0, C = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (a[j] == 0.0) continue;
    bound[j] = a[j] > 0 ? hi[j] : lo[j];
    if (bound[j] == 0.0) continue;
    A += a[j] * a[j];
    if (std::isfinite(bound[j])) breaks.emplace_back(bound[j] / a[j], j);
  }
  std::sort(breaks.begin(), breaks.end());
  const auto f = [&](double t, double A_, double beta_, double C_) {
    return t * A_ + beta_ - lambda * std::sqrt(t * t * A_ + C_);
  };
  double best_t = 0.0, best_val = 0.0;
  double t0 = 0.0;
  std::size_t idx = 0;
  while (true) {
    const double t1 = idx < breaks.size() ? breaks[idx].first : kInf;
    // Candidates on [t0, t1].
    if (A > 0.0) {
      const double l2 = lambda * lambda;
      if (l2 > A) {
        const double ts = std::sqrt(C / (l2 - A));
        if (ts > t0 && ts < t1) {
          const double v = f(ts, A, beta, C);
          if (v > best_val) best_val = v, best_t = ts;
        }
      }
      if (std::isfinite(t1)) {
        const double v = f(t1, A, beta, C);
        if (v > best_val) best_val = v, best_t = t1;
      }
    }
    if (!std::isfinite(t1)) break;
    while (idx < breaks.size() && breaks[idx].first == t1) {
      const std::size_t j = breaks[idx++].second;
      A -= a[j] * a[j];
      beta += a[j] * bound[j];
      C += bound[j] * bound[j];
    }
    if (A < 1e-300) A = 0.0;
    t0 = t1;
  }
  if (best_t > 0.0) {
    for (std::size_t j = 0; j < k; ++j) {
      if (a[j] == 0.0 || bound[j] == 0.0) continue;
      const double v = best_t * a[j];
      out.d[j] = a[j] > 0 ? (v >= hi[j] ? hi[j] : v) : (v <= lo[j] ? lo[j] : v);
    }
  }
  out.gain = dot(a, out.d) - lambda * norm(out.d, Norm::kL2);
}

// max over d ∈ [lo, hi] (lo <= 0 <= hi) of aᵀd - λ‖d‖_p, or an unbounded ray
// when the recession-restricted dual norm of a exceeds λ + ray_tol.
inline InnerMax inner_max(std::span<const double> a, std::span<const double> lo,
                          std::span<const double> hi, double lambda, Norm p, double ray_tol) {
  InnerMax out;
  const Vector clip = recession_clip(a, lo, hi);
  const double rec = norm(clip, dual_norm(p));
  if (rec > lambda + ray_tol) {
    out.unbounded = true;
    out.ray = best_ray(clip, p);
    out.slope = dot(a, out.ray);
    return out;
  }
  out.d.assign(a.size(), 0.0);
  switch (p) {
    case Norm::kL1: inner_l1(a, lo, hi, lambda, out); break;
    case Norm::kL2: inner_l2(a, lo, hi, lambda, out); break;
    case Norm::kLInf: inner_linf(a, lo, hi, lambda, out); break;
  }
  return out;
}

// ξ = ζ + d with coordinates at a bound set to the bound exactly.
inline Vector shift_point(std::span<const double> zeta, std::span<const double> d,
                          const BoxSupport& box) {
  Vector xi(zeta.size());
  for (std::size_t j = 0; j < xi.size(); ++j) {
    xi[j] = zeta[j] + d[j];
    if (d[j] == box.upper[j] - zeta[j] && d[j] != 0.0) xi[j] = box.upper[j];
    if (d[j] == box.lower[j] - zeta[j] && d[j] != 0.0) xi[j] = box.lower[j];
    xi[j] = std::clamp(xi[j], box.lower[j], box.upper[j]);
  }
  return xi;
}

inline bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

enum class SeparationMethod { kAuto, kExact, kHeuristic };

struct HeuristicOptions {
  std::size_t random_starts = 128;
  std::size_t max_rounds = 50;
  std::uint64_t seed = 0x5eed;
};

struct SeparationBudget {
  std::size_t max_evaluations = std::numeric_limits<std::size_t>::max();
  double seconds = kInf;
};

// Exact l1 search over intervals of σ = T(x)ᵀπ, used when ext(Π) is over the cap.
struct BranchBoundOptions {
  std::size_t max_nodes = 20000;
  double gap_tol = 1e-9;  // relative
};

struct SeparatorOptions {
  SeparationMethod method = SeparationMethod::kAuto;
  VertexOptions vertex;
  LpOptions lp;
  HeuristicOptions heuristic;
  BranchBoundOptions branch_bound;
  double ray_tol = 1e-9;
  double tie_tol = 1e-9;
};

// Separation oracles bound to one problem. Π and its vertices are computed
// once; all query methods are const and safe to call concurrently.
class Separator {
 public:
  explicit Separator(TwoStageProblem p, SeparatorOptions options = {})
      : problem_(std::move(p)),
        options_(options),
        dual_(problem_, options_.vertex, options_.method != SeparationMethod::kHeuristic) {
    require_solvable(problem_);
    branch_bound_ = problem_.norm() == Norm::kL1 && problem_.support().bounded() &&
                    std::ranges::all_of(dual_.coordinate_bound(),
                                        [](double b) { return std::isfinite(b); });
    if (options_.method == SeparationMethod::kExact)
      require(dual_.has_vertices() || branch_bound_, ErrorCode::kDimensionTooLarge,
              "exact separation needs ext(Π) within the vertex cap");
  }

  const TwoStageProblem& problem() const noexcept { return problem_; }
  const DualPolytope& dual() const noexcept { return dual_; }
  const SeparatorOptions& options() const noexcept { return options_; }
  bool exact() const noexcept {
    return options_.method != SeparationMethod::kHeuristic &&
           (dual_.has_vertices() || branch_bound_);
  }
  bool uses_branch_bound() const noexcept { return exact() && !dual_.has_vertices(); }

  // g_i value of a given point: Z(x, ξ) - λ‖ξ - ζ^i‖.
  double g_at(std::span<const double> x, double lambda, std::size_t i,
              std::span<const double> xi) const {
    return evaluate_Z(problem_, x, xi, options_.lp).value -
           lambda * distance(xi, sample(i), problem_.norm());
  }

  SeparationOutcome separate(std::span<const double> x, double lambda, std::size_t i) const {
    return exact() ? separate_exact(x, lambda, i) : separate_heuristic(x, lambda, i);
  }

  // Global maximizer over ext(Π) with the per-vertex closed form, or the
  // branch-and-bound search when the vertices were not enumerated.
  SeparationOutcome separate_exact(std::span<const double> x, double lambda,
                                   std::size_t i) const {
    if (!dual_.has_vertices() && branch_bound_) return separate_branch_bound(x, lambda, i);
    require(dual_.has_vertices(), ErrorCode::kDimensionTooLarge,
            "ext(Π) exceeds the vertex cap; use the heuristic oracle");
    const Frame fr = frame(x, i);
    SeparationOutcome best;
    best.kind = OutcomeKind::kFinite;
    SeparationOutcome ray;
    ray.kind = OutcomeKind::kUnbounded;
    ray.ray_slope = -kInf;
    bool any_ray = false;
    for (const auto& v : dual_.vertices()) {
      ++best.evaluations;
      Candidate c = evaluate_vertex(fr, v, lambda);
      if (c.unbounded) {
        if (c.slope > ray.ray_slope) {
          any_ray = true;
          ray.ray = std::move(c.ray);
          ray.ray_slope = c.slope;
          ray.pi = {v, DualSource::kVertex};
        }
        continue;
      }
      consider(best, fr, std::move(c), v, DualSource::kVertex);
    }
    if (any_ray) {
      ray.evaluations = best.evaluations;
      return ray;
    }
    return best;
  }

  // l1 ground norm, bounded box. exact is false only when the node limit is hit.
  SeparationOutcome separate_branch_bound(std::span<const double> x, double lambda,
                                          std::size_t i) const {
    require(branch_bound_, ErrorCode::kRequiresL1Norm,
            "branch and bound needs the l1 norm, a bounded box and a bounded Π");
    const Frame fr = frame(x, i);
    SeparationOutcome best;
    best.kind = OutcomeKind::kFinite;
    const auto z = evaluate_Z(problem_, x, fr.zeta, options_.lp);
    best.xi = fr.zeta;
    best.value = z.value;
    best.pi = z.dual;
    std::size_t evals = 1;
    const auto r = branch_bound(fr, lambda, best, kInf, evals, [] { return false; });
    best.exact = r == SearchEnd::kClosed;
    best.evaluations = evals;
    return best;
  }

  // Multi-start alternation between Z(x, ξ) (π given ξ) and the closed form (ξ
  // given π), plus the exact ±e^j recession checks. Not certified optimal.
  SeparationOutcome separate_heuristic(std::span<const double> x, double lambda,
                                       std::size_t i) const {
    const Frame fr = frame(x, i);
    if (auto ray = axis_ray_check(fr, x, lambda)) return *ray;
    SeparationOutcome best;
    best.kind = OutcomeKind::kFinite;
    best.exact = false;
    for (const auto& start : starts(i)) {
      auto res = alternate(fr, x, lambda, start, best, kInf);
      if (res) return *res;
    }
    return best;
  }

  // Stops at the first candidate whose g value exceeds `cutoff`; the driver
  // passes t_i + ε/N with ε the optimality tolerance.
  SeparationOutcome separate_incremental(std::span<const double> x, double lambda,
                                         std::size_t i, double cutoff,
                                         const SeparationBudget& budget = {}) const {
    const auto started = std::chrono::steady_clock::now();
    const double threshold = cutoff;
    const Frame fr = frame(x, i);
    std::size_t evals = 0;
    const auto exhausted = [&] {
      if (evals >= budget.max_evaluations) return true;
      const double el =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      return el > budget.seconds;
    };
    const auto finish = [&](SeparationOutcome o) {
      o.evaluations = evals;
      return o;
    };

    {
      ++evals;
      const auto z = evaluate_Z(problem_, x, fr.zeta, options_.lp);
      if (z.value > threshold) {
        SeparationOutcome o;
        o.kind = OutcomeKind::kFinite;
        o.xi = fr.zeta;
        o.pi = z.dual;
        o.value = z.value;
        o.exact = false;
        return finish(o);
      }
    }

    if (uses_branch_bound()) {
      SeparationOutcome best;
      best.kind = OutcomeKind::kFinite;
      const auto r = branch_bound(fr, lambda, best, threshold, evals, exhausted);
      if (r == SearchEnd::kCutoff) {
        best.exact = false;
        return finish(best);
      }
      if (r == SearchEnd::kBudget) return finish(incomplete());
      SeparationOutcome o;
      o.kind = OutcomeKind::kNoViolation;
      o.exact = r == SearchEnd::kClosed;
      return finish(o);
    }

    if (exact()) {
      for (const auto& v : dual_.vertices()) {
        if (exhausted()) return finish(incomplete());
        ++evals;
        Candidate c = evaluate_vertex(fr, v, lambda);
        if (c.unbounded) {
          SeparationOutcome o;
          o.kind = OutcomeKind::kUnbounded;
          o.ray = std::move(c.ray);
          o.ray_slope = c.slope;
          o.pi = {v, DualSource::kVertex};
          return finish(o);
        }
        if (c.value > threshold) {
          SeparationOutcome o;
          o.kind = OutcomeKind::kFinite;
          o.xi = std::move(c.xi);
          o.pi = {v, DualSource::kVertex};
          o.value = c.value;
          o.exact = false;
          return finish(o);
        }
      }
      SeparationOutcome o;
      o.kind = OutcomeKind::kNoViolation;
      return finish(o);
    }

    if (auto ray = axis_ray_check(fr, x, lambda)) return finish(*ray);
    SeparationOutcome best;
    best.kind = OutcomeKind::kFinite;
    best.exact = false;
    for (const auto& start : starts(i)) {
      if (exhausted()) return finish(incomplete());
      ++evals;
      auto res = alternate(fr, x, lambda, start, best, threshold);
      if (res) return finish(*res);
    }
    SeparationOutcome o;
    o.kind = OutcomeKind::kNoViolation;
    o.exact = false;
    return finish(o);
  }

 private:
  struct Frame {
    Vector h;     // h(x)
    Matrix t;     // T(x)
    Vector zeta;  // ζ^i
    Vector lo, hi;  // box shifted by ζ^i
  };

  struct Candidate {
    bool unbounded = false;
    Vector xi;
    double value = -kInf;
    Vector ray;
    double slope = 0.0;
  };

  const Vector& sample(std::size_t i) const {
    require(i < problem_.num_samples(), ErrorCode::kInvalidArgument, "sample index out of range");
    return problem_.ambiguity().samples[i];
  }

  Frame frame(std::span<const double> x, std::size_t i) const {
    require(x.size() == problem_.nx(), ErrorCode::kDimensionMismatch, "separation: x length");
    Frame fr;
    fr.h = eval_h(problem_.uncertainty(), x);
    fr.t = eval_T(problem_.uncertainty(), x);
    fr.zeta = sample(i);
    const auto& box = problem_.support();
    fr.lo.resize(problem_.k());
    fr.hi.resize(problem_.k());
    for (std::size_t j = 0; j < problem_.k(); ++j) {
      fr.lo[j] = std::min(0.0, box.lower[j] - fr.zeta[j]);
      fr.hi[j] = std::max(0.0, box.upper[j] - fr.zeta[j]);
    }
    return fr;
  }

  double value_at(const Frame& fr, std::span<const double> pi, std::span<const double> xi,
                  double lambda) const {
    const Vector txi = multiply(fr.t, xi);
    double v = 0.0;
    for (std::size_t r = 0; r < pi.size(); ++r) v += pi[r] * (fr.h[r] + txi[r]);
    return v - lambda * distance(xi, fr.zeta, problem_.norm());
  }

  Candidate evaluate_vertex(const Frame& fr, std::span<const double> pi, double lambda) const {
    const Vector a = multiply_transposed(fr.t, pi);
    const auto inner =
        detail::inner_max(a, fr.lo, fr.hi, lambda, problem_.norm(), options_.ray_tol);
    Candidate c;
    if (inner.unbounded) {
      c.unbounded = true;
      c.ray = inner.ray;
      c.slope = inner.slope;
      return c;
    }
    c.xi = detail::shift_point(fr.zeta, inner.d, problem_.support());
    c.value = value_at(fr, pi, c.xi, lambda);
    return c;
  }

  // Keeps the better of `best` and `c`; ties prefer ζ^i, then the
  // lexicographically smallest ξ.
  void consider(SeparationOutcome& best, const Frame& fr, Candidate c, std::span<const double> pi,
                DualSource source) const {
    const double tol = options_.tie_tol * (1.0 + std::abs(c.value));
    bool take = best.xi.empty() || c.value > best.value + tol;
    if (!take && c.value >= best.value - tol) {
      const bool c_at = c.xi == fr.zeta;
      const bool b_at = best.xi == fr.zeta;
      if (c_at != b_at) take = c_at;
      else if (!b_at) take = detail::lex_less(c.xi, best.xi);
    }
    if (!take) return;
    best.xi = std::move(c.xi);
    best.value = c.value;
    best.pi = {Vector(pi.begin(), pi.end()), source};
  }

  SeparationOutcome incomplete() const {
    SeparationOutcome o;
    o.kind = OutcomeKind::kIncomplete;
    o.exact = false;
    return o;
  }

  // U(x, ±e^j) > λ along an unbounded coordinate certifies g_i = +∞.
  std::optional<SeparationOutcome> axis_ray_check(const Frame& fr, std::span<const double> x,
                                                  double lambda) const {
    std::optional<SeparationOutcome> best;
    for (std::size_t j = 0; j < problem_.k(); ++j)
      for (double sign : {1.0, -1.0}) {
        if ((sign > 0 ? fr.hi[j] : fr.lo[j]) != sign * kInf) continue;
        Vector r(problem_.k(), 0.0);
        r[j] = sign;
        const auto u = recession_price_U(problem_, x, r, options_.lp);
        if (u.value > lambda + options_.ray_tol && (!best || u.value > best->ray_slope)) {
          SeparationOutcome o;
          o.kind = OutcomeKind::kUnbounded;
          o.ray = r;
          o.ray_slope = u.value;
          o.pi = u.dual;
          o.exact = problem_.norm() == Norm::kL1;
          best = std::move(o);
        }
      }
    return best;
  }

  std::vector<Vector> starts(std::size_t i) const {
    const auto& box = problem_.support();
    const auto& zeta = sample(i);
    std::vector<Vector> out{zeta};
    Vector up = zeta, down = zeta;
    for (std::size_t j = 0; j < problem_.k(); ++j) {
      if (std::isfinite(box.upper[j])) up[j] = box.upper[j];
      if (std::isfinite(box.lower[j])) down[j] = box.lower[j];
    }
    out.push_back(up);
    out.push_back(down);
    for (std::size_t m = 0; m < problem_.num_samples(); ++m)
      if (m != i) out.push_back(problem_.ambiguity().samples[m]);
    const CandidateGrid grid = candidate_grid(box, zeta);
    std::mt19937_64 rng(options_.heuristic.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
    for (std::size_t s = 0; s < options_.heuristic.random_starts; ++s) {
      Vector v(problem_.k());
      for (std::size_t j = 0; j < v.size(); ++j) {
        std::uniform_int_distribution<std::size_t> pick(0, grid.sets[j].size() - 1);
        v[j] = grid.sets[j][pick(rng)];
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  // One alternation run. Returns early with an Unbounded outcome, or with a
  // Finite one as soon as the value exceeds `threshold`; otherwise updates best.
  std::optional<SeparationOutcome> alternate(const Frame& fr, std::span<const double> x,
                                             double lambda, Vector xi, SeparationOutcome& best,
                                             double threshold) const {
    for (std::size_t round = 0; round < options_.heuristic.max_rounds; ++round) {
      const auto z = evaluate_Z(problem_, x, xi, options_.lp);
      const double here = z.value - lambda * distance(xi, fr.zeta, problem_.norm());
      Candidate cur;
      cur.xi = xi;
      cur.value = here;
      consider(best, fr, std::move(cur), z.dual.pi, DualSource::kHeuristic);
      if (here > threshold) {
        SeparationOutcome o = best;
        o.xi = xi;
        o.value = here;
        o.pi = {z.dual.pi, DualSource::kHeuristic};
        o.exact = false;
        return o;
      }
      Candidate next = evaluate_vertex(fr, z.dual.pi, lambda);
      if (next.unbounded) {
        SeparationOutcome o;
        o.kind = OutcomeKind::kUnbounded;
        o.ray = std::move(next.ray);
        o.ray_slope = next.slope;
        o.pi = {z.dual.pi, DualSource::kHeuristic};
        o.exact = false;
        return o;
      }
      if (next.value <= here + options_.tie_tol * (1.0 + std::abs(here))) break;
      xi = std::move(next.xi);
    }
    return std::nullopt;
  }

  enum class SearchEnd { kClosed, kCutoff, kNodeLimit, kBudget };

  // ψ_j(s) = max over d in [lo_j, hi_j] of s·d - λ|d|; convex in s with kinks at ±λ.
  static double psi(double s, double lo, double hi, double lambda) {
    return std::max({0.0, (s + lambda) * lo, (s - lambda) * hi});
  }

  // Maximizes πᵀ(h + Tζ) + Σ_j ψ_j((Tᵀπ)_j) over Π. Each node bounds σ = Tᵀπ
  // to a box and replaces ψ_j by its secant there, which gives an LP upper
  // bound; branching splits an interval at a kink of ψ_j. Stops early once the
  // incumbent exceeds `cutoff`, or when no node can reach it.
  template <class Exhausted>
  SearchEnd branch_bound(const Frame& fr, double lambda, SeparationOutcome& best, double cutoff,
                         std::size_t& evals, const Exhausted& exhausted) const {
    const std::size_t k = problem_.k();
    const LinearProgram& region = dual_.region();
    const std::size_t my = region.num_cols();
    const Vector hz = [&] {
      Vector v = multiply(fr.t, fr.zeta);
      for (std::size_t r = 0; r < my; ++r) v[r] += fr.h[r];
      return v;
    }();
    Vector root_lo(k), root_hi(k);
    for (std::size_t j = 0; j < k; ++j) {
      double b = 0.0;
      for (std::size_t r = 0; r < my; ++r) b += std::abs(fr.t(r, j)) * dual_.coordinate_bound()[r];
      root_lo[j] = -b;
      root_hi[j] = b;
    }

    struct Node {
      double bound;
      Vector lo, hi;
    };
    const auto worse = [](const Node& a, const Node& b) { return a.bound < b.bound; };
    std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);

    const auto tol = [&](double v) {
      return options_.branch_bound.gap_tol * (1.0 + std::abs(v));
    };
    const auto floor_value = [&] {
      const double v = best.xi.empty() ? -kInf : best.value;
      return std::isfinite(cutoff) ? std::max(v, cutoff) : v;
    };

    // Solves the node relaxation; pushes the node if it can still improve.
    Vector sigma_star;
    const auto relax = [&](Vector lo, Vector hi) {
      LinearProgram lp = region;
      std::vector<std::pair<std::size_t, bool>> extra;
      for (std::size_t j = 0; j < k; ++j) {
        if (lo[j] > root_lo[j]) extra.emplace_back(j, true);
        if (hi[j] < root_hi[j]) extra.emplace_back(j, false);
      }
      const std::size_t m0 = region.num_rows();
      Matrix a(m0 + extra.size(), my);
      for (std::size_t r = 0; r < m0; ++r)
        std::copy(region.matrix.row(r).begin(), region.matrix.row(r).end(), a.row(r).begin());
      for (std::size_t e = 0; e < extra.size(); ++e) {
        const auto [j, lower] = extra[e];
        for (std::size_t r = 0; r < my; ++r) a(m0 + e, r) = fr.t(r, j);
        lp.senses.push_back(lower ? RowSense::kGreaterEqual : RowSense::kLessEqual);
        lp.rhs.push_back(lower ? lo[j] : hi[j]);
      }
      lp.matrix = std::move(a);
      double constant = 0.0;
      Vector slope(k, 0.0);
      for (std::size_t j = 0; j < k; ++j) {
        const double pa = psi(lo[j], fr.lo[j], fr.hi[j], lambda);
        const double pb = psi(hi[j], fr.lo[j], fr.hi[j], lambda);
        if (hi[j] - lo[j] > 1e-14 * (1.0 + std::abs(lo[j]))) slope[j] = (pb - pa) / (hi[j] - lo[j]);
        constant += pa - slope[j] * lo[j];
      }
      const Vector w = multiply(fr.t, slope);
      for (std::size_t r = 0; r < my; ++r) lp.objective[r] = -(hz[r] + w[r]);
      ++evals;
      const auto sol = solve_lp(lp, options_.lp);
      if (sol.status != LpStatus::kOptimal) return;
      const double bound = constant - sol.objective;
      const Vector& pi = sol.primal;
      Candidate c = evaluate_vertex(fr, pi, lambda);
      if (!c.unbounded) consider(best, fr, std::move(c), pi, DualSource::kSeparation);
      if (bound <= floor_value() + tol(bound)) return;
      sigma_star = multiply_transposed(fr.t, pi);
      // Pick the coordinate whose secant overestimates ψ_j most at σ*.
      std::size_t pick = k;
      double gap = tol(bound);
      for (std::size_t j = 0; j < k; ++j) {
        const double s = std::clamp(sigma_star[j], lo[j], hi[j]);
        const double g = psi(lo[j], fr.lo[j], fr.hi[j], lambda) + slope[j] * (s - lo[j]) -
                         psi(s, fr.lo[j], fr.hi[j], lambda);
        if (g > gap) {
          gap = g;
          pick = j;
        }
      }
      if (pick == k) return;
      double split = kInf;
      for (double kink : {-lambda, lambda}) {
        if ((kink < 0.0 && fr.lo[pick] == 0.0) || (kink > 0.0 && fr.hi[pick] == 0.0)) continue;
        if (kink <= lo[pick] || kink >= hi[pick]) continue;
        if (std::abs(kink - sigma_star[pick]) < std::abs(split - sigma_star[pick])) split = kink;
      }
      if (!std::isfinite(split)) return;
      Vector left_hi = hi, right_lo = lo;
      left_hi[pick] = split;
      right_lo[pick] = split;
      open.push({bound, lo, std::move(left_hi)});
      open.push({bound, std::move(right_lo), std::move(hi)});
    };

    relax(root_lo, root_hi);
    std::size_t nodes = 1;
    while (!open.empty()) {
      if (!best.xi.empty() && best.value > cutoff) return SearchEnd::kCutoff;
      Node n = open.top();
      open.pop();
      if (n.bound <= floor_value() + tol(n.bound)) continue;
      if (nodes >= options_.branch_bound.max_nodes) return SearchEnd::kNodeLimit;
      if (exhausted()) return SearchEnd::kBudget;
      ++nodes;
      relax(std::move(n.lo), std::move(n.hi));
    }
    if (!best.xi.empty() && best.value > cutoff) return SearchEnd::kCutoff;
    return SearchEnd::kClosed;
  }

  TwoStageProblem problem_;
  SeparatorOptions options_;
  DualPolytope dual_;
  bool branch_bound_ = false;
};

inline SeparationOutcome separate_exact_l1(const Separator& sep, std::span<const double> x,
                                           double lambda, std::size_t i) {
  require(sep.problem().norm() == Norm::kL1, ErrorCode::kRequiresL1Norm,
          "separate_exact_l1 needs the l1 ground norm");
  return sep.separate_exact(x, lambda, i);
}

inline SeparationOutcome separate_exact_l1(const TwoStageProblem& p, std::span<const double> x,
                                           double lambda, std::size_t i) {
  return separate_exact_l1(Separator(p), x, lambda, i);
}

// Exact oracle for the l2 ground norm; l∞ goes through the same vertex scan.
inline SeparationOutcome separate_exact_l2(const Separator& sep, std::span<const double> x,
                                           double lambda, std::size_t i) {
  require(sep.problem().norm() != Norm::kL1, ErrorCode::kInvalidArgument,
          "separate_exact_l2 expects the l2 (or l∞) ground norm");
  return sep.separate_exact(x, lambda, i);
}

inline SeparationOutcome separate_exact_l2(const TwoStageProblem& p, std::span<const double> x,
                                           double lambda, std::size_t i) {
  return separate_exact_l2(Separator(p), x, lambda, i);
}

inline SeparationOutcome separate_incremental(const Separator& sep, std::span<const double> x,
                                              double lambda, std::size_t i, double cutoff,
                                              const SeparationBudget& budget = {}) {
  return sep.separate_incremental(x, lambda, i, cutoff, budget);
}

// Grid scan over {l_j, l_j + step, ..., u_j}^k ∪ {ζ^i}, with Z from the LP.
inline SeparationOutcome separate_bruteforce(const TwoStageProblem& p, std::span<const double> x,
                                             double lambda, std::size_t i, double grid_step,
                                             std::size_t max_points = 2'000'000,
                                             const LpOptions& lp = {}) {
  const auto& box = p.support();
  require(box.bounded(), ErrorCode::kInvalidArgument, "brute-force oracle needs a bounded box");
  require(grid_step > 0.0, ErrorCode::kInvalidArgument, "grid step must be positive");
  require(i < p.num_samples(), ErrorCode::kInvalidArgument, "sample index out of range");
  std::vector<Vector> axes(p.k());
  double total = 1.0;
  for (std::size_t j = 0; j < p.k(); ++j) {
    const double w = box.upper[j] - box.lower[j];
    const auto steps = static_cast<std::size_t>(std::floor(w / grid_step + 1e-9));
    for (std::size_t s = 0; s <= steps; ++s) axes[j].push_back(box.lower[j] + s * grid_step);
    if (axes[j].back() < box.upper[j]) axes[j].push_back(box.upper[j]);
    total *= static_cast<double>(axes[j].size());
  }
  require(total <= static_cast<double>(max_points), ErrorCode::kGridTooLarge,
          "grid has " + std::to_string(static_cast<long long>(total)) + " points");
  const Vector& zeta = p.ambiguity().samples[i];
  SeparationOutcome best;
  best.kind = OutcomeKind::kFinite;
  const auto eval = [&](const Vector& xi) {
    const auto z = evaluate_Z(p, x, xi, lp);
    const double v = z.value - lambda * distance(xi, zeta, p.norm());
    ++best.evaluations;
    if (best.xi.empty() || v > best.value + 1e-12 * (1.0 + std::abs(v))) {
      best.xi = xi;
      best.value = v;
      best.pi = z.dual;
    }
  };
  eval(zeta);
  std::vector<std::size_t> idx(p.k(), 0);
  Vector xi(p.k());
  while (true) {
    for (std::size_t j = 0; j < p.k(); ++j) xi[j] = axes[j][idx[j]];
    eval(xi);
    std::size_t j = p.k();
    while (j > 0) {
      --j;
      if (++idx[j] < axes[j].size()) break;
      idx[j] = 0;
      if (j == 0) return best;
    }
    if (p.k() == 0) return best;
  }
}

// λ* = max_{π∈Π} ‖T(x)ᵀπ‖_* for Ξ = R^k. For p = 1 (dual l∞) this is
// max_j max(U(x, e^j), U(x, -e^j)) and needs only LPs; otherwise ext(Π).
inline double closed_form_lambda_star(const Separator& sep, std::span<const double> x) {
  const auto& p = sep.problem();
  require(p.support().unconstrained(), ErrorCode::kRequiresUnboundedSupport,
          "the closed form applies to Ξ = R^k only");
  if (p.norm() == Norm::kL1) {
    double best = 0.0;
    for (std::size_t j = 0; j < p.k(); ++j)
      for (double s : {1.0, -1.0}) {
        Vector r(p.k(), 0.0);
        r[j] = s;
        best = std::max(best, recession_price_U(p, x, r, sep.options().lp).value);
      }
    return best;
  }
  require(sep.dual().has_vertices(), ErrorCode::kDimensionTooLarge,
          "ext(Π) exceeds the vertex cap");
  const Matrix t = eval_T(p.uncertainty(), x);
  double best = 0.0;
  for (const auto& v : sep.dual().vertices())
    best = std::max(best, norm(multiply_transposed(t, v), dual_norm(p.norm())));
  return best;
}

inline double closed_form_lambda_star(const TwoStageProblem& p, std::span<const double> x) {
  return closed_form_lambda_star(Separator(p), x);
}

}  // namespace wdro
