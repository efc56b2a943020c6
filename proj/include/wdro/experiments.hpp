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

// Evaluation pipeline: radius sweeps with SAA baselines, out-of-sample
// estimates, extremal-support classification, l1-vs-l2 dominance statistics
// and the counterexample check.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wdro/algorithm.hpp"
#include "wdro/counterexample.hpp"
#include "wdro/facility_location.hpp"
#include "wdro/parallel.hpp"
#include "wdro/second_stage.hpp"
#include "wdro/separation.hpp"

namespace wdro {

// cᵀx + mean_s Z(x, ξ^s).
inline double out_of_sample(const TwoStageProblem& p, std::span<const double> x,
                            const std::vector<Vector>& test, const LpOptions& lp = {},
                            std::size_t threads = 1) {
  require(!test.empty(), ErrorCode::kInvalidArgument, "empty test sample");
  std::vector<double> z(test.size());
  parallel_for(test.size(), threads,
               [&](std::size_t s) { z[s] = evaluate_Z(p, x, test[s], lp).value; });
  double sum = 0.0;
  for (double v : z) sum += v;
  return dot(p.first_stage().cost, x) + sum / static_cast<double>(test.size());
}

enum class SupportClass { kAtSample, kOnBoundary, kInterior };

inline std::string support_class_name(SupportClass c) {
  switch (c) {
    case SupportClass::kAtSample: return "AtSample";
    case SupportClass::kOnBoundary: return "OnBoundary";
    case SupportClass::kInterior: return "Interior";
  }
  return "?";
}

struct ClassifiedSupport {
  Vector xi;
  double weight = 0.0;
  SupportClass kind = SupportClass::kInterior;
  bool candidate_structure = false;  // every ξ_j ∈ {l_j, u_j} ∪ {ζ^i_j}
};

// Pooled scenarios with positive epigraph weight at the final master.
inline std::vector<ClassifiedSupport> extremal_support(const TwoStageProblem& p,
                                                       const SolveReport& report,
                                                       double feas_tol = 1e-6,
                                                       double weight_tol = 1e-9) {
  const auto& box = report.support_box;
  std::vector<ClassifiedSupport> out;
  for (const auto& sp : report.support) {
    if (sp.weight <= weight_tol) continue;
    ClassifiedSupport c;
    c.xi = sp.xi;
    c.weight = sp.weight;
    bool at_sample = sp.sample_index.has_value();
    for (const auto& z : p.ambiguity().samples)
      if (max_abs_diff(z, sp.xi) <= feas_tol) at_sample = true;
    if (at_sample) c.kind = SupportClass::kAtSample;
    else if (box.on_boundary(sp.xi, feas_tol)) c.kind = SupportClass::kOnBoundary;
    else c.kind = SupportClass::kInterior;
    c.candidate_structure = true;
    for (std::size_t j = 0; j < sp.xi.size(); ++j) {
      const double v = sp.xi[j];
      bool ok = std::abs(v - box.lower[j]) <= feas_tol || std::abs(v - box.upper[j]) <= feas_tol;
      for (const auto& z : p.ambiguity().samples) ok = ok || std::abs(v - z[j]) <= feas_tol;
      c.candidate_structure = c.candidate_structure && ok;
    }
    out.push_back(std::move(c));
  }
  return out;
}

// a·10^b for a ∈ {1, 2.5, 5}, b ∈ {-1, 0, 1, 2}.
inline std::vector<double> default_epsilon_grid() {
  std::vector<double> out;
  for (int b = -1; b <= 2; ++b)
    for (double a : {1.0, 2.5, 5.0}) out.push_back(a * std::pow(10.0, b));
  return out;
}

struct SweepConfig {
  std::vector<double> epsilons = default_epsilon_grid();
  std::vector<Norm> norms = {Norm::kL1, Norm::kL2};
  std::size_t simulations = 50;
  std::size_t n_train = 5;
  std::size_t n_test = 2000;
  std::uint64_t base_seed = 1;
  double time_limit = 300.0;
  std::size_t threads = 1;
  SolveConfig solve;
  bool zero_runtimes = false;  // byte-reproducible output

  void validate() const {
    require(!epsilons.empty() && !norms.empty(), ErrorCode::kInvalidArgument,
            "sweep grids must be nonempty");
    require(simulations > 0 && n_train > 0 && n_test > 0, ErrorCode::kInvalidArgument,
            "sweep counts must be positive");
    for (double e : epsilons)
      require(e > 0.0, ErrorCode::kInvalidArgument, "radii must be positive");
  }
};

struct RunRecord {
  std::string instance;
  Norm norm = Norm::kL1;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string method;  // TSDRO or SAA
  std::string status;
  double objective = 0.0;
  double oos_estimate = 0.0;
  double runtime_s = 0.0;
  std::size_t iterations = 0;
  std::size_t boundary_support_count = 0;
  std::size_t sample_support_count = 0;
};

inline std::string norm_label(Norm p) {
  switch (p) {
    case Norm::kL1: return "1";
    case Norm::kL2: return "2";
    case Norm::kLInf: return "inf";
  }
  return "?";
}

inline std::uint64_t test_seed(const SweepConfig& cfg) { return cfg.base_seed ^ 0x7e57'5eedULL; }

// One TSDRO and one SAA record per (p, ε, seed), in that order. SAA is solved
// once per seed and repeated across (p, ε).
inline std::vector<RunRecord> run_sweep(const FlInstance& inst, const std::string& id,
                                        const SweepConfig& cfg) {
  cfg.validate();
  const auto test = sample_demands(inst, cfg.n_test, test_seed(cfg));
  const std::size_t ns = cfg.simulations;
  struct SaaRun {
    RunRecord rec;
  };
  std::vector<SaaRun> saa(ns);
  parallel_for(ns, cfg.threads, [&](std::size_t s) {
    const std::uint64_t seed = cfg.base_seed + s;
    auto& r = saa[s].rec;
    r.instance = id;
    r.seed = seed;
    r.method = "SAA";
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto train = sample_demands(inst, cfg.n_train, seed);
      const auto sol = saa_solve(inst, train);
      const auto p = build_tsdro(inst, 1.0, Norm::kL1, train);
      r.status = "Converged";
      r.objective = sol.value;
      r.oos_estimate = out_of_sample(p, sol.x, test, cfg.solve.lp);
      r.iterations = 1;
      CutPools unique(p);
      r.sample_support_count = unique.scenarios().size();
    } catch (const Error& e) {
      r.status = std::string("Error:") + std::string(error_code_name(e.code()));
      r.objective = r.oos_estimate = std::nan("");
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  struct Task {
    Norm norm;
    double epsilon;
    std::size_t sim;
  };
  std::vector<Task> tasks;
  for (Norm p : cfg.norms)
    for (double e : cfg.epsilons)
      for (std::size_t s = 0; s < ns; ++s) tasks.push_back({p, e, s});
  std::vector<RunRecord> tsdro(tasks.size());
  parallel_for(tasks.size(), cfg.threads, [&](std::size_t k) {
    const auto& t = tasks[k];
    auto& r = tsdro[k];
    r.instance = id;
    r.norm = t.norm;
    r.epsilon = t.epsilon;
    r.seed = cfg.base_seed + t.sim;
    r.method = "TSDRO";
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto p = build_tsdro(inst, t.epsilon, t.norm, sample_demands(inst, cfg.n_train, r.seed));
      SolveConfig sc = cfg.solve;
      sc.time_limit = cfg.time_limit;
      sc.threads = 1;
      const auto rep = solve_tsdro(p, sc);
      r.status = status_name(rep.status);
      r.objective = rep.objective;
      r.oos_estimate = out_of_sample(p, rep.x, test, sc.lp);
      r.iterations = rep.iterations;
      for (const auto& c : extremal_support(p, rep)) {
        if (c.kind == SupportClass::kAtSample) ++r.sample_support_count;
        else if (c.kind == SupportClass::kOnBoundary) ++r.boundary_support_count;
      }
    } catch (const Error& e) {
      r.status = std::string("Error:") + std::string(error_code_name(e.code()));
      r.objective = r.oos_estimate = std::nan("");
    }
    r.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  std::vector<RunRecord> out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    out.push_back(tsdro[k]);
    RunRecord s = saa[tasks[k].sim].rec;
    s.norm = tasks[k].norm;
    s.epsilon = tasks[k].epsilon;
    out.push_back(std::move(s));
  }
  if (cfg.zero_runtimes)
    for (auto& r : out) r.runtime_s = 0.0;
  return out;
}

inline constexpr const char* kCsvHeader =
    "instance,norm_p,epsilon,seed,method,status,objective,oos_estimate,runtime_s,iterations,"
    "boundary_support_count,sample_support_count";

namespace detail {

inline std::string fmt_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

}  // namespace detail

inline void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records)
    out << r.instance << ',' << norm_label(r.norm) << ',' << detail::fmt_number(r.epsilon) << ','
        << r.seed << ',' << r.method << ',' << r.status << ',' << detail::fmt_number(r.objective)
        << ',' << detail::fmt_number(r.oos_estimate) << ',' << detail::fmt_number(r.runtime_s)
        << ',' << r.iterations << ',' << r.boundary_support_count << ','
        << r.sample_support_count << '\n';
}

inline nlohmann::json records_to_json(const std::vector<RunRecord>& records) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return detail::fmt_number(v);
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"instance", r.instance},
                   {"norm_p", norm_label(r.norm)},
                   {"epsilon", num(r.epsilon)},
                   {"seed", r.seed},
                   {"method", r.method},
                   {"status", r.status},
                   {"objective", num(r.objective)},
                   {"oos_estimate", num(r.oos_estimate)},
                   {"runtime_s", num(r.runtime_s)},
                   {"iterations", r.iterations},
                   {"boundary_support_count", r.boundary_support_count},
                   {"sample_support_count", r.sample_support_count}});
  return arr;
}

inline nlohmann::json report_to_json(const SolveReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return detail::fmt_number(v);
  };
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace)
    trace.push_back({{"iteration", t.iteration},
                     {"master_value", num(t.master_value)},
                     {"lower_bound", num(t.lower_bound)},
                     {"upper_bound", num(t.upper_bound)},
                     {"scenarios", t.scenarios},
                     {"rays", t.rays},
                     {"optimality_cuts", t.optimality_cuts},
                     {"lambda_cuts", t.lambda_cuts},
                     {"cuts_added", t.cuts_added},
                     {"duplicates", t.duplicates},
                     {"separation_phase", t.separation_phase},
                     {"wall_time", t.wall_time}});
  nlohmann::json support = nlohmann::json::array();
  for (const auto& sp : r.support) {
    nlohmann::json e = {{"xi", sp.xi}, {"weight", sp.weight}};
    e["sample_index"] = sp.sample_index ? nlohmann::json(*sp.sample_index) : nlohmann::json();
    support.push_back(std::move(e));
  }
  return {{"status", status_name(r.status)},
          {"objective", num(r.objective)},
          {"lower_bound", num(r.lower_bound)},
          {"upper_bound", num(r.upper_bound)},
          {"x", r.x},
          {"lambda", r.lambda},
          {"iterations", r.iterations},
          {"runtime_s", r.runtime_s},
          {"exact_separation", r.exact_separation},
          {"message", r.message},
          {"support", std::move(support)},
          {"trace", std::move(trace)}};
}

inline double percentile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::kInvalidArgument, "percentile of an empty set");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct DominanceRow {
  double epsilon = 0.0;
  std::size_t pairs = 0;
  double prob_l2_not_worse = 0.0;  // o_l2 <= o_l1 or within 0.1%
  bool first_order_dominance = false;  // F_l2(o) >= F_l1(o) at pooled points
  double l1_p20 = 0, l1_p50 = 0, l1_p80 = 0;
  double l2_p20 = 0, l2_p50 = 0, l2_p80 = 0;
};

inline constexpr double kNearEqualRelTol = 1e-3;

// Pairs the two record sets by (ε, seed) on their out-of-sample estimates.
inline std::vector<DominanceRow> dominance_stats(const std::vector<RunRecord>& l1,
                                                 const std::vector<RunRecord>& l2) {
  using Key = std::pair<double, std::uint64_t>;
  std::map<Key, double> a, b;
  for (const auto& r : l1)
    require(a.emplace(Key{r.epsilon, r.seed}, r.oos_estimate).second, ErrorCode::kUnpairedRecords,
            "duplicate l1 record");
  for (const auto& r : l2)
    require(b.emplace(Key{r.epsilon, r.seed}, r.oos_estimate).second, ErrorCode::kUnpairedRecords,
            "duplicate l2 record");
  require(a.size() == b.size(), ErrorCode::kUnpairedRecords, "record sets differ in size");
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> by_eps;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    require(it != b.end(), ErrorCode::kUnpairedRecords,
            "no l2 record for epsilon " + detail::fmt_number(k.first) + ", seed " +
                std::to_string(k.second));
    by_eps[k.first].first.push_back(v);
    by_eps[k.first].second.push_back(it->second);
  }
  std::vector<DominanceRow> out;
  for (const auto& [eps, pair] : by_eps) {
    const auto& o1 = pair.first;
    const auto& o2 = pair.second;
    DominanceRow row;
    row.epsilon = eps;
    row.pairs = o1.size();
    std::size_t good = 0;
    for (std::size_t s = 0; s < o1.size(); ++s)
      if (o2[s] <= o1[s] || std::abs(o2[s] - o1[s]) <= kNearEqualRelTol * std::abs(o1[s])) ++good;
    row.prob_l2_not_worse = static_cast<double>(good) / static_cast<double>(o1.size());
    const auto cdf = [](const std::vector<double>& v, double o) {
      return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x <= o; })) /
             static_cast<double>(v.size());
    };
    row.first_order_dominance = true;
    for (const auto* set : {&o1, &o2})
      for (double o : *set)
        if (cdf(o2, o) < cdf(o1, o)) row.first_order_dominance = false;
    row.l1_p20 = percentile(o1, 0.2);
    row.l1_p50 = percentile(o1, 0.5);
    row.l1_p80 = percentile(o1, 0.8);
    row.l2_p20 = percentile(o2, 0.2);
    row.l2_p50 = percentile(o2, 0.5);
    row.l2_p80 = percentile(o2, 0.8);
    out.push_back(row);
  }
  return out;
}

struct CounterexampleRow {
  double epsilon = 0.0;
  double value = 0.0;
  double expected = 0.0;  // min{ε + 2, 2ε}
  double refuted = 0.0;   // Kε + v_SAA
  double lambda = 0.0;
  Vector worst_case;      // heaviest non-sample support point, if any
  double runtime_s = 0.0;
  bool pass = false;
};

struct CounterexampleReport {
  std::vector<CounterexampleRow> rows;
  bool all_pass = true;
};

inline CounterexampleReport verify_counterexample(const std::vector<double>& epsilons,
                                                  double tol = 1e-6, double feas_tol = 1e-6) {
  CounterexampleReport out;
  for (double eps : epsilons) {
    const auto start = std::chrono::steady_clock::now();
    const auto p = counterexample_problem(eps);
    SolveConfig cfg;
    cfg.opt_tol = 1e-8;
    cfg.feas_tol = 1e-9;
    const auto rep = solve_tsdro(p, cfg);
    CounterexampleRow row;
    row.epsilon = eps;
    row.value = rep.objective;
    row.expected = std::min(eps + 2.0, 2.0 * eps);
    row.lambda = rep.lambda;
    double k = 0.0;
    for (std::size_t j = 0; j < p.k(); ++j) {
      Vector e(p.k(), 0.0);
      e[j] = 1.0;
      k = std::max(k, recession_price_U(p, rep.x, e).value);
    }
    row.refuted = k * eps + saa_value(p, rep.x);
    double best_w = 0.0;
    for (const auto& c : extremal_support(p, rep, feas_tol))
      if (c.kind != SupportClass::kAtSample && c.weight > best_w) {
        best_w = c.weight;
        row.worst_case = c.xi;
      }
    row.pass = rep.status == SolveStatus::kConverged && std::abs(row.value - row.expected) <= tol;
    if (eps > 2.0)
      row.pass = row.pass && std::abs(row.lambda - 1.0) <= tol && row.worst_case.size() == 2 &&
                 norm(row.worst_case, Norm::kLInf) <= feas_tol;
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.all_pass = out.all_pass && row.pass;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace wdro
