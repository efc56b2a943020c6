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

// Cutting-plane driver. Each iteration solves the master; a Benders phase
// adds θ cuts for pooled scenarios and λ cuts for pooled rays; only when that
// adds nothing, the per-sample separation phase generates new scenarios or
// rays. LB is the master value, UB comes from exact separation values or,
// when the separation phase adds nothing, from the master value itself.

#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "wdro/error.hpp"
#include "wdro/linalg.hpp"
#include "wdro/lp_core.hpp"
#include "wdro/master.hpp"
#include "wdro/model.hpp"
#include "wdro/parallel.hpp"
#include "wdro/second_stage.hpp"
#include "wdro/separation.hpp"

namespace wdro {

struct Enhancements {
  bool initial_worst_case_scenario = false;
  bool explicit_l1_ray_constraints = false;
  bool incremental_separation = false;
  bool stabilized_benders = false;

  static Enhancements from_mask(unsigned mask) {
    return {(mask & 1u) != 0, (mask & 2u) != 0, (mask & 4u) != 0, (mask & 8u) != 0};
  }
};

inline std::string enhancement_names(const Enhancements& e) {
  std::string out;
  const auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ",";
    out += name;
  };
  add(e.initial_worst_case_scenario, "worst-case");
  add(e.explicit_l1_ray_constraints, "explicit-rays");
  add(e.incremental_separation, "incremental");
  add(e.stabilized_benders, "stabilized");
  return out.empty() ? "none" : out;
}

// Comma list of worst-case, explicit-rays, incremental, stabilized, all, none.
inline Enhancements parse_enhancements(const std::string& text) {
  Enhancements e;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item == "none") continue;
    if (item == "all") e = Enhancements::from_mask(15);
    else if (item == "worst-case") e.initial_worst_case_scenario = true;
    else if (item == "explicit-rays") e.explicit_l1_ray_constraints = true;
    else if (item == "incremental") e.incremental_separation = true;
    else if (item == "stabilized") e.stabilized_benders = true;
    else fail(ErrorCode::kInvalidArgument, "unknown enhancement '" + item + "'");
  }
  return e;
}

enum class IntegerMode { kRelax, kEnumerate };

struct SolveConfig {
  double opt_tol = 1e-4;     // ε
  double feas_tol = 1e-6;    // ε_f
  double time_limit = 300.0;  // seconds
  SeparationBudget separation_budget{std::numeric_limits<std::size_t>::max(), 10.0};
  Enhancements enhancements;
  IntegerMode integer_mode = IntegerMode::kRelax;
  std::size_t max_integer_points = 4096;
  std::size_t max_iterations = 10000;
  std::size_t stall_limit = 3;
  std::size_t threads = 1;
  SeparatorOptions separator;
  LpOptions lp;
  std::ostream* master_dump = nullptr;

  void validate() const {
    require(opt_tol > 0.0, ErrorCode::kInvalidArgument, "optimality tolerance must be positive");
    require(feas_tol > 0.0, ErrorCode::kInvalidArgument, "feasibility tolerance must be positive");
    require(time_limit > 0.0, ErrorCode::kInvalidArgument, "time limit must be positive");
  }
};

enum class SolveStatus { kConverged, kTimeLimit, kStalled };

inline std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "Converged";
    case SolveStatus::kTimeLimit: return "TimeLimit";
    case SolveStatus::kStalled: return "Stalled";
  }
  return "?";
}

struct IterationRecord {
  std::size_t iteration = 0;
  double master_value = 0.0;
  double lower_bound = -kInf;
  double upper_bound = kInf;
  std::size_t scenarios = 0, rays = 0;
  std::size_t optimality_cuts = 0, lambda_cuts = 0;
  std::size_t cuts_added = 0, duplicates = 0;
  bool separation_phase = false;
  double wall_time = 0.0;
};

struct SupportPoint {
  Vector xi;
  double weight = 0.0;  // Σ_i epigraph dual at the final master solution
  std::optional<std::size_t> sample_index;
};

struct SolveReport {
  SolveStatus status = SolveStatus::kStalled;
  Vector x;
  double lambda = 0.0;
  double lower_bound = -kInf;
  double upper_bound = kInf;
  double objective = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<SupportPoint> support;  // every pooled scenario with its weight
  BoxSupport support_box;
  std::size_t iterations = 0;
  double runtime_s = 0.0;
  bool exact_separation = true;
  std::string message;
};

// Corner u for seeding Ξ′; infinite u_j fall back to max_i ζ^i_j + spread.
inline std::vector<Vector> initial_scenarios(const TwoStageProblem& p) {
  const auto& box = p.support();
  if (std::all_of(box.upper.begin(), box.upper.end(), [](double v) { return v == kInf; }))
    return {};
  Vector corner(p.k());
  for (std::size_t j = 0; j < p.k(); ++j) {
    if (std::isfinite(box.upper[j])) {
      corner[j] = box.upper[j];
      continue;
    }
    double lo = kInf, hi = -kInf;
    for (const auto& z : p.ambiguity().samples) lo = std::min(lo, z[j]), hi = std::max(hi, z[j]);
    corner[j] = hi + (hi > lo ? hi - lo : 1.0);
  }
  return {corner};
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline SolveReport solve_continuous(const TwoStageProblem& p, const SolveConfig& cfg,
                                    double time_budget) {
  const Stopwatch clock;
  SolveReport rep;
  rep.support_box = p.support();
  const Separator sep(p, cfg.separator);
  rep.exact_separation = sep.exact();
  const auto& enh = cfg.enhancements;
  const std::size_t n = p.num_samples();
  const double cut_tol = cfg.opt_tol / static_cast<double>(n);

  CutPools pools(p, cfg.separator.vertex.dedup_tol);
  if (enh.initial_worst_case_scenario)
    for (const auto& xi : initial_scenarios(p)) pools.add_scenario(xi);

  MasterOptions mo;
  const double lbar = lambda_upper_bound(p, sep.dual());
  mo.lambda_cap = lbar + 1e-9 * (1.0 + lbar);
  mo.t_lower = t_lower_bounds(p, cfg.lp);
  bool explicit_rays = false;
  if (enh.explicit_l1_ray_constraints) {
    if (p.norm() == Norm::kL1) explicit_rays = true;
    else rep.message = "explicit ray constraints skipped (l1 only); ";
  }

  double lb = -kInf, ub = kInf;
  std::optional<Vector> incumbent;
  double incumbent_lambda = 0.0;
  MasterSolution last;
  std::size_t stall = 0;
  bool done = false;

  for (std::size_t iter = 1; !done; ++iter) {
    if (iter > 1 && clock.seconds() > time_budget) {
      rep.status = SolveStatus::kTimeLimit;
      break;
    }
    if (iter > cfg.max_iterations) {
      rep.status = SolveStatus::kStalled;
      rep.message += "iteration cap reached; ";
      break;
    }
    MasterProblem m = build_master(p, pools, mo);
    if (explicit_rays) m = add_explicit_ray_constraints(p, std::move(m));
    if (cfg.master_dump) {
      *cfg.master_dump << "# master iteration " << iter << "\n";
      dump_master(*cfg.master_dump, m);
    }
    const MasterSolution ms = solve_master(m, cfg.lp);
    last = ms;
    const double lb_prev = lb;
    lb = std::max(lb, ms.objective);
    rep.iterations = iter;

    std::size_t added = 0, dups = 0;
    const auto count = [&](AddResult r) { (r == AddResult::kAdded ? added : dups) += 1; };

    // Benders phase over pooled scenarios and rays.
    const std::size_t ns = pools.scenarios().size();
    std::vector<RecourseValue> zs(ns);
    parallel_for(ns, cfg.threads,
                 [&](std::size_t s) { zs[s] = evaluate_Z(p, ms.x, pools.scenarios()[s], cfg.lp); });
    std::optional<Vector> stab;
    if (enh.stabilized_benders && incumbent) {
      stab = Vector(p.nx());
      for (std::size_t i = 0; i < p.nx(); ++i) (*stab)[i] = 0.5 * ((*incumbent)[i] + ms.x[i]);
    }
    const double theta_tol = cfg.opt_tol / static_cast<double>(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      if (!(zs[s].value > ms.theta[s] + theta_tol)) continue;
      const Vector xi = pools.scenarios()[s];
      if (stab) {
        const auto zt = evaluate_Z(p, *stab, xi, cfg.lp);
        if (dot(zt.dual.pi, recourse_rhs(p, ms.x, xi)) > ms.theta[s] + theta_tol &&
            pools.add_optimality_cut(xi, zt.dual) == AddResult::kAdded) {
          ++added;
          continue;
        }
      }
      count(pools.add_optimality_cut(xi, zs[s].dual));
    }
    for (std::size_t r = 0; r < pools.rays().size(); ++r) {
      const Vector ray = pools.rays()[r];
      const auto u = recession_price_U(p, ms.x, ray, cfg.lp);
      if (u.value > ms.lambda + cfg.feas_tol) count(pools.add_lambda_cut(ray, u.dual));
    }

    bool separation_phase = false;
    if (added == 0) {
      separation_phase = true;
      std::vector<SeparationOutcome> out(n);
      parallel_for(n, cfg.threads, [&](std::size_t i) {
        if (clock.seconds() > time_budget) {
          out[i].kind = OutcomeKind::kIncomplete;
          out[i].exact = false;
          return;
        }
        out[i] = enh.incremental_separation
                     ? sep.separate_incremental(ms.x, ms.lambda, i, ms.t[i] + cut_tol,
                                                cfg.separation_budget)
                     : sep.separate(ms.x, ms.lambda, i);
      });
      bool ub_certified = true, complete = true;
      double sum_g = 0.0, dup_excess = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& o = out[i];
        if (!o.exact) ub_certified = false;
        switch (o.kind) {
          case OutcomeKind::kFinite:
            sum_g += o.value;
            if (o.value > ms.t[i] + cut_tol) {
              AddResult r = pools.add_scenario(o.xi, o.pi);
              if (r == AddResult::kDuplicate) r = pools.add_optimality_cut(o.xi, o.pi);
              if (r == AddResult::kDuplicate) dup_excess += o.value - ms.t[i];
              count(r);
            }
            break;
          case OutcomeKind::kUnbounded: {
            ub_certified = false;
            const auto u = recession_price_U(p, ms.x, o.ray, cfg.lp);
            if (u.value > ms.lambda + cfg.feas_tol) count(pools.add_lambda_cut(o.ray, u.dual));
            break;
          }
          case OutcomeKind::kNoViolation:
            ub_certified = false;
            break;
          case OutcomeKind::kIncomplete:
            ub_certified = complete = false;
            break;
        }
      }
      if (ub_certified) {
        const double cand = dot(p.first_stage().cost, ms.x) + p.epsilon() * ms.lambda +
                            sum_g / static_cast<double>(n);
        if (cand < ub) {
          ub = cand;
          incumbent = ms.x;
          incumbent_lambda = ms.lambda;
        }
      }
      // Nothing new: g_i <= t_i except for cuts the master already holds,
      // which it satisfies up to LP rounding.
      if (added == 0 && complete && ms.objective + dup_excess / static_cast<double>(n) < ub) {
        ub = ms.objective + dup_excess / static_cast<double>(n);
        incumbent = ms.x;
        incumbent_lambda = ms.lambda;
      }
      if (added == 0 && (dups > 0 || !complete)) ++stall;
      else stall = 0;
    } else {
      stall = 0;
    }
    if (added == 0 && lb > lb_prev + 1e-12 * (1.0 + std::abs(lb))) stall = 0;

    IterationRecord rec;
    rec.iteration = iter;
    rec.master_value = ms.objective;
    rec.lower_bound = lb;
    rec.upper_bound = ub;
    rec.scenarios = pools.scenarios().size();
    rec.rays = pools.rays().size();
    rec.optimality_cuts = pools.optimality_cut_count();
    rec.lambda_cuts = pools.lambda_cut_count();
    rec.cuts_added = added;
    rec.duplicates = dups;
    rec.separation_phase = separation_phase;
    rec.wall_time = clock.seconds();
    rep.trace.push_back(rec);

    if (ub - lb <= cfg.opt_tol) {
      rep.status = SolveStatus::kConverged;
      done = true;
    } else if (stall >= cfg.stall_limit) {
      rep.status = SolveStatus::kStalled;
      rep.message += "no new cuts for " + std::to_string(stall) + " iterations; ";
      done = true;
    }
  }

  rep.lower_bound = lb;
  rep.upper_bound = ub;
  rep.x = incumbent ? *incumbent : last.x;
  rep.lambda = incumbent ? incumbent_lambda : last.lambda;
  rep.objective = std::isfinite(ub) ? ub : lb;
  // A tight t_i lower bound means ζ^i itself attains g_i, so that mass goes
  // to the sample's scenario.
  std::vector<bool> placed(n, false);
  for (std::size_t s = 0; s < pools.scenarios().size() && s < last.scenario_weight.size(); ++s) {
    SupportPoint sp;
    sp.xi = pools.scenarios()[s];
    sp.weight = last.scenario_weight[s];
    for (std::size_t i = 0; i < n; ++i)
      if (max_abs_diff(sp.xi, p.ambiguity().samples[i]) <= pools.dedup_tol()) {
        if (!sp.sample_index) sp.sample_index = i;
        if (!placed[i] && i < last.t_bound_weight.size()) sp.weight += last.t_bound_weight[i];
        placed[i] = true;
      }
    rep.support.push_back(std::move(sp));
  }
  if (!rep.exact_separation) rep.message += "heuristic separation (UB not certified); ";
  rep.runtime_s = clock.seconds();
  return rep;
}

// Integer points of the box [lo, hi] over the given indices.
inline std::vector<Vector> integer_patterns(const FirstStage& f, std::size_t cap) {
  std::vector<std::pair<long long, long long>> ranges;
  double total = 1.0;
  for (std::size_t i : f.integer_idx) {
    const auto lo = static_cast<long long>(std::ceil(f.lower[i] - 1e-9));
    const auto hi = static_cast<long long>(std::floor(f.upper[i] + 1e-9));
    ranges.emplace_back(lo, hi);
    total *= static_cast<double>(std::max(0LL, hi - lo + 1));
  }
  require(total <= static_cast<double>(cap), ErrorCode::kInvalidArgument,
          "integer enumeration exceeds the cap of " + std::to_string(cap) + " points");
  std::vector<Vector> out;
  if (total == 0.0) return out;
  Vector cur(ranges.size());
  for (std::size_t j = 0; j < ranges.size(); ++j) cur[j] = static_cast<double>(ranges[j].first);
  while (true) {
    out.push_back(cur);
    std::size_t j = ranges.size();
    while (j > 0) {
      --j;
      if (cur[j] < static_cast<double>(ranges[j].second)) {
        cur[j] += 1.0;
        break;
      }
      cur[j] = static_cast<double>(ranges[j].first);
      if (j == 0) return out;
    }
    if (ranges.empty()) return out;
  }
}

// Solves one continuous problem per integer pattern and keeps the best.
template <class Solve>
SolveReport enumerate_integers(const TwoStageProblem& p, const SolveConfig& cfg, Solve&& solve) {
  const Stopwatch clock;
  const auto& f = p.first_stage();
  std::optional<SolveReport> best;
  std::size_t total_iterations = 0;
  SolveStatus worst = SolveStatus::kConverged;
  for (const auto& pattern : integer_patterns(f, cfg.max_integer_points)) {
    Vector lo = f.lower, hi = f.upper;
    for (std::size_t j = 0; j < f.integer_idx.size(); ++j)
      lo[f.integer_idx[j]] = hi[f.integer_idx[j]] = pattern[j];
    const double left = cfg.time_limit - clock.seconds();
    if (left <= 0.0) {
      worst = SolveStatus::kTimeLimit;
      break;
    }
    SolveReport r;
    try {
      r = solve(p.with_first_stage_bounds(lo, hi), left);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kRecourseInfeasible)
        continue;  // pattern infeasible
      throw;
    }
    total_iterations += r.iterations;
    if (r.status != SolveStatus::kConverged) worst = r.status;
    if (!best || r.objective < best->objective) best = std::move(r);
  }
  require(best.has_value(), ErrorCode::kInvalidArgument, "no feasible integer pattern");
  best->iterations = total_iterations;
  if (worst != SolveStatus::kConverged) best->status = worst;
  best->runtime_s = clock.seconds();
  return *best;
}

}  // namespace detail

inline SolveReport solve_tsdro(const TwoStageProblem& p, const SolveConfig& cfg = {}) {
  cfg.validate();
  require_solvable(p);
  check_assumptions(p, cfg.lp);
  if (cfg.integer_mode == IntegerMode::kEnumerate && !p.first_stage().integer_idx.empty())
    return detail::enumerate_integers(p, cfg, [&](const TwoStageProblem& q, double left) {
      return detail::solve_continuous(q, cfg, left);
    });
  return detail::solve_continuous(p, cfg, cfg.time_limit);
}

struct SaaSolution {
  Vector x;
  double value = 0.0;
};

// min cᵀx + (1/N) Σ_i qᵀy^i over x ∈ X and W y^i (>=|=) h(x) + T(x)ζ^i; the
// integrality of x is ignored.
inline SaaSolution saa_extensive_form(const TwoStageProblem& p, const LpOptions& lp = {}) {
  const auto& f = p.first_stage();
  const auto& s = p.second_stage();
  const auto& map = p.uncertainty();
  const std::size_t nx = p.nx(), ny = p.ny(), n = p.num_samples();
  LpBuilder b;
  for (std::size_t i = 0; i < nx; ++i) b.add_variable(f.cost[i], f.lower[i], f.upper[i]);
  for (std::size_t r = 0; r < f.a.rows(); ++r) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t i = 0; i < nx; ++i)
      if (f.a(r, i) != 0.0) terms.emplace_back(i, f.a(r, i));
    b.add_row(std::move(terms), RowSense::kEqual, f.b[r]);
  }
  for (const auto& z : p.ambiguity().samples) {
    const std::size_t y0 = b.num_variables();
    for (std::size_t c = 0; c < ny; ++c)
      b.add_variable(s.cost[c] / static_cast<double>(n), 0.0, kInf);
    const Vector t0z = multiply(map.t0, z);
    for (std::size_t r = 0; r < s.rows(); ++r) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t c = 0; c < ny; ++c)
        if (s.w(r, c) != 0.0) terms.emplace_back(y0 + c, s.w(r, c));
      for (std::size_t v = 0; v < nx; ++v) {
        double coef = map.h(r, v);
        if (v < map.t_list.size()) coef += dot(map.t_list[v].row(r), z);
        if (coef != 0.0) terms.emplace_back(v, -coef);
      }
      b.add_row(std::move(terms),
                s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual : RowSense::kGreaterEqual,
                map.h0[r] + t0z[r]);
    }
  }
  const auto sol = solve_lp(b.build(), lp);
  require(sol.status == LpStatus::kOptimal, ErrorCode::kInvalidArgument,
          "SAA extensive form is not solvable (empty X?)");
  return {Vector(sol.primal.begin(), sol.primal.begin() + nx), sol.objective};
}

namespace detail {

inline SolveReport closed_form_continuous(const TwoStageProblem& p, const SolveConfig& cfg) {
  const Stopwatch clock;
  const auto& f = p.first_stage();
  const auto& s = p.second_stage();
  const auto& map = p.uncertainty();
  const std::size_t nx = p.nx(), ny = p.ny(), my = p.my(), k = p.k(), n = p.num_samples();
  LpBuilder b;
  for (std::size_t i = 0; i < nx; ++i) b.add_variable(f.cost[i], f.lower[i], f.upper[i]);
  const std::size_t lam = b.add_variable(p.epsilon(), 0.0, kInf);
  const auto block = [&](double cost) {
    const std::size_t c0 = b.num_variables();
    for (std::size_t c = 0; c < ny; ++c) b.add_variable(cost * s.cost[c], 0.0, kInf);
    return c0;
  };
  const auto sense = [&](std::size_t r) {
    return s.row_type(r) == RecourseRow::kEqual ? RowSense::kEqual : RowSense::kGreaterEqual;
  };
  for (std::size_t r = 0; r < f.a.rows(); ++r) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t i = 0; i < nx; ++i) terms.emplace_back(i, f.a(r, i));
    b.add_row(std::move(terms), RowSense::kEqual, f.b[r]);
  }
  // W y^i >= h(x) + T(x) ζ^i.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y0 = block(1.0 / static_cast<double>(n));
    const auto& z = p.ambiguity().samples[i];
    const Vector t0z = multiply(map.t0, z);
    for (std::size_t r = 0; r < my; ++r) {
      std::vector<std::pair<std::size_t, double>> terms;
      for (std::size_t c = 0; c < ny; ++c) terms.emplace_back(y0 + c, s.w(r, c));
      for (std::size_t v = 0; v < nx; ++v) {
        double coef = map.h(r, v);
        if (v < map.t_list.size()) coef += dot(map.t_list[v].row(r), z);
        terms.emplace_back(v, -coef);
      }
      b.add_row(std::move(terms), sense(r), map.h0[r] + t0z[r]);
    }
  }
  // λ >= qᵀν^j, Wν^j >= ±T(x)e_j.
  for (std::size_t j = 0; j < k; ++j)
    for (double sign : {1.0, -1.0}) {
      const std::size_t v0 = block(0.0);
      std::vector<std::pair<std::size_t, double>> lrow{{lam, 1.0}};
      for (std::size_t c = 0; c < ny; ++c) lrow.emplace_back(v0 + c, -s.cost[c]);
      b.add_row(std::move(lrow), RowSense::kGreaterEqual, 0.0);
      for (std::size_t r = 0; r < my; ++r) {
        std::vector<std::pair<std::size_t, double>> terms;
        for (std::size_t c = 0; c < ny; ++c) terms.emplace_back(v0 + c, s.w(r, c));
        for (std::size_t v = 0; v < map.t_list.size(); ++v)
          terms.emplace_back(v, -sign * map.t_list[v](r, j));
        b.add_row(std::move(terms), sense(r), sign * map.t0(r, j));
      }
    }
  const auto sol = solve_lp(b.build(), cfg.lp);
  require(sol.status == LpStatus::kOptimal, ErrorCode::kInvalidArgument,
          "closed-form LP is not solvable (empty X?)");
  SolveReport rep;
  rep.status = SolveStatus::kConverged;
  rep.x.assign(sol.primal.begin(), sol.primal.begin() + nx);
  rep.lambda = sol.primal[lam];
  rep.objective = rep.lower_bound = rep.upper_bound = sol.objective;
  rep.support_box = p.support();
  rep.iterations = 1;
  for (std::size_t i = 0; i < n; ++i) {
    SupportPoint sp;
    sp.xi = p.ambiguity().samples[i];
    sp.weight = 1.0 / static_cast<double>(n);
    sp.sample_index = i;
    rep.support.push_back(std::move(sp));
  }
  rep.runtime_s = clock.seconds();
  return rep;
}

}  // namespace detail

// Ξ = R^k, l1: min cᵀx + ελ + (1/N)Σ qᵀy^i with λ >= U(x, ±e^j) written via
// the recourse blocks ν^j, μ^j; valid because g_i(x, λ) = Z(x, ζ^i) once λ
// meets the implicit constraint.
inline SolveReport unconstrained_closed_form(const TwoStageProblem& p,
                                             const SolveConfig& cfg = {}) {
  require(p.support().unconstrained(), ErrorCode::kRequiresUnboundedSupport,
          "closed form needs Ξ = R^k");
  require(p.norm() == Norm::kL1, ErrorCode::kRequiresL1Norm, "closed form needs the l1 norm");
  require_solvable(p);
  if (cfg.integer_mode == IntegerMode::kEnumerate && !p.first_stage().integer_idx.empty())
    return detail::enumerate_integers(p, cfg, [&](const TwoStageProblem& q, double) {
      return detail::closed_form_continuous(q, cfg);
    });
  return detail::closed_form_continuous(p, cfg);
}

}  // namespace wdro
