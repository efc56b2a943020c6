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

// wdro: solve, sweep, verify-counterexample, gen-instance.
//
// Exit codes: 0 converged / all checks pass, 2 time limit or stall (partial
// report still written), 1 input or usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wdro/wdro.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitIncomplete = 2;

wdro::Norm parse_norm(const std::string& s) {
  if (s == "1") return wdro::Norm::kL1;
  if (s == "2") return wdro::Norm::kL2;
  if (s == "inf") return wdro::Norm::kLInf;
  wdro::fail(wdro::ErrorCode::kInvalidArgument, "unknown norm '" + s + "' (use 1, 2 or inf)");
}

wdro::SeparationMethod parse_method(const std::string& s) {
  if (s == "auto") return wdro::SeparationMethod::kAuto;
  if (s == "exact") return wdro::SeparationMethod::kExact;
  if (s == "heuristic") return wdro::SeparationMethod::kHeuristic;
  wdro::fail(wdro::ErrorCode::kInvalidArgument,
             "unknown separation method '" + s + "' (use auto, exact or heuristic)");
}

struct SolverFlags {
  double opt_tol = 1e-4;
  double feas_tol = 1e-6;
  double time_limit = 300.0;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  std::string enhancements = "none";
  std::string separation = "auto";

  void attach(CLI::App* app) {
    app->add_option("--opt-tol", opt_tol, "Optimality tolerance on UB - LB")->capture_default_str();
    app->add_option("--feas-tol", feas_tol, "Feasibility tolerance")->capture_default_str();
    app->add_option("--time-limit", time_limit, "Time limit per solve in seconds")
        ->capture_default_str();
    app->add_option("--threads", threads, "Worker threads")->capture_default_str();
    app->add_option("--enhancements", enhancements,
                    "Comma list of worst-case,explicit-rays,incremental,stabilized, or all/none")
        ->capture_default_str();
    app->add_option("--separation", separation, "auto, exact or heuristic")->capture_default_str();
  }

  wdro::SolveConfig config() const {
    wdro::SolveConfig cfg;
    cfg.opt_tol = opt_tol;
    cfg.feas_tol = feas_tol;
    cfg.time_limit = time_limit;
    cfg.threads = std::max<std::size_t>(1, threads);
    cfg.enhancements = wdro::parse_enhancements(enhancements);
    cfg.separator.method = parse_method(separation);
    cfg.validate();
    return cfg;
  }
};

bool is_json_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".json";
}

// Holmberg text gets the experiment cost scaling unless raw costs are asked for.
wdro::FlInstance load_fl(const std::string& path, bool raw_costs) {
  auto inst = wdro::parse_holmberg(wdro::read_text_file(path));
  return raw_costs ? inst : wdro::apply_paper_modifications(inst);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else wdro::write_text_file(out, text);
}

std::string format_vector(const wdro::Vector& v) {
  std::ostringstream s;
  s << '(';
  for (std::size_t j = 0; j < v.size(); ++j) s << (j ? ", " : "") << v[j];
  s << ')';
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage distributionally robust LP solver over 1-Wasserstein balls"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve one instance and write the report as JSON");
  std::string solve_in, solve_out, solve_norm;
  std::optional<double> solve_eps;
  std::uint64_t solve_seed = 1;
  std::size_t solve_n = 5;
  bool solve_raw = false, solve_enumerate = false;
  std::string solve_dump;
  SolverFlags solve_flags;
  solve->add_option("instance", solve_in, "Instance JSON, or Holmberg text for facility location")
      ->required();
  solve->add_option("--epsilon", solve_eps, "Wasserstein radius (overrides the instance)");
  solve->add_option("--norm", solve_norm, "Ground norm: 1, 2 or inf (overrides the instance)");
  solve->add_option("--seed", solve_seed, "Sampling seed for Holmberg input")->capture_default_str();
  solve->add_option("--n-train", solve_n, "Training samples for Holmberg input")
      ->capture_default_str();
  solve->add_flag("--raw-costs", solve_raw, "Do not scale Holmberg shipping costs");
  solve->add_flag("--enumerate-integers", solve_enumerate,
                  "Enumerate integer first-stage patterns instead of relaxing them");
  solve->add_option("--dump-master", solve_dump, "Append every master LP to this file");
  solve->add_option("--out", solve_out, "Report path (default: stdout)");
  solve_flags.attach(solve);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Radius sweep with SAA baselines on a Holmberg file");
  std::string sweep_in, sweep_out, sweep_id;
  std::vector<double> sweep_eps;
  std::vector<std::string> sweep_norms{"1", "2"};
  wdro::SweepConfig sweep_cfg;
  bool sweep_raw = false;
  SolverFlags sweep_flags;
  sweep->add_option("instance", sweep_in, "Holmberg text file")->required();
  sweep->add_option("--epsilon", sweep_eps, "Radii (default 1, 2.5, 5 x 10^-1..10^2)");
  sweep->add_option("--norm", sweep_norms, "Ground norms")->capture_default_str();
  sweep->add_option("--simulations", sweep_cfg.simulations, "Seeds per (norm, radius)")
      ->capture_default_str();
  sweep->add_option("--n-train", sweep_cfg.n_train, "Training samples")->capture_default_str();
  sweep->add_option("--n-test", sweep_cfg.n_test, "Test samples")->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.base_seed, "Base seed")->capture_default_str();
  sweep->add_option("--id", sweep_id, "Instance id in the records (default: file stem)");
  sweep->add_flag("--raw-costs", sweep_raw, "Do not scale Holmberg shipping costs");
  sweep->add_flag("--zero-runtimes", sweep_cfg.zero_runtimes,
                  "Write 0 for runtimes so repeated runs are byte-identical");
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep_flags.attach(sweep);

  // verify-counterexample
  auto* verify =
      app.add_subcommand("verify-counterexample", "Check the two-dimensional counterexample");
  std::vector<double> verify_eps{0.5, 1.0, 2.0, 3.0, 10.0};
  std::string verify_out;
  verify->add_option("epsilon", verify_eps, "Radii to check")->capture_default_str();
  verify->add_option("--out", verify_out, "Optional JSON report path");

  // gen-instance
  auto* gen = app.add_subcommand("gen-instance", "Generate a synthetic facility-location instance");
  std::size_t gen_i = 3, gen_j = 5, gen_n = 5;
  std::uint64_t gen_seed = 1;
  double gen_eps = 1.0;
  std::string gen_norm = "1", gen_out, gen_name;
  gen->add_option("--facilities", gen_i, "I")->capture_default_str();
  gen->add_option("--customers", gen_j, "J")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed for geometry and training samples")
      ->capture_default_str();
  gen->add_option("--epsilon", gen_eps, "Radius written to the JSON instance")
      ->capture_default_str();
  gen->add_option("--norm", gen_norm, "Ground norm written to the JSON instance")
      ->capture_default_str();
  gen->add_option("--n-train", gen_n, "Samples written to the JSON instance")->capture_default_str();
  gen->add_option("--name", gen_name, "File stem (default fl_IxJ)");
  gen->add_option("--out", gen_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve) {
      auto cfg = solve_flags.config();
      cfg.integer_mode = solve_enumerate ? wdro::IntegerMode::kEnumerate : wdro::IntegerMode::kRelax;
      std::optional<wdro::TwoStageProblem> p;
      if (is_json_path(solve_in)) {
        p = wdro::load_problem(solve_in);
        if (solve_eps || !solve_norm.empty()) {
          auto amb = p->ambiguity();
          if (solve_eps) amb.epsilon = *solve_eps;
          if (!solve_norm.empty()) amb.norm = parse_norm(solve_norm);
          p = p->with_ambiguity(std::move(amb));
        }
      } else {
        const auto inst = load_fl(solve_in, solve_raw);
        p = wdro::build_tsdro(inst, solve_eps.value_or(1.0),
                              parse_norm(solve_norm.empty() ? "1" : solve_norm), solve_n,
                              solve_seed);
      }
      std::ofstream dump;
      if (!solve_dump.empty()) {
        dump.open(solve_dump);
        if (!dump) wdro::fail(wdro::ErrorCode::kIoError, "cannot write '" + solve_dump + "'");
        cfg.master_dump = &dump;
      }
      const auto rep = wdro::solve_tsdro(*p, cfg);
      emit(solve_out, wdro::report_to_json(rep).dump(2) + "\n");
      std::cerr << wdro::status_name(rep.status) << ": objective " << std::setprecision(10)
                << rep.objective << ", gap " << rep.upper_bound - rep.lower_bound << ", "
                << rep.iterations << " iterations, " << rep.runtime_s << " s\n";
      return rep.status == wdro::SolveStatus::kConverged ? kExitOk : kExitIncomplete;
    }

    if (*sweep) {
      const auto inst = load_fl(sweep_in, sweep_raw);
      if (!sweep_eps.empty()) sweep_cfg.epsilons = sweep_eps;
      sweep_cfg.norms.clear();
      for (const auto& n : sweep_norms) sweep_cfg.norms.push_back(parse_norm(n));
      sweep_cfg.solve = sweep_flags.config();
      sweep_cfg.time_limit = sweep_flags.time_limit;
      sweep_cfg.threads = sweep_cfg.solve.threads;
      const std::string id =
          sweep_id.empty() ? std::filesystem::path(sweep_in).stem().string() : sweep_id;
      std::filesystem::create_directories(sweep_out);
      const auto recs = wdro::run_sweep(inst, id, sweep_cfg);
      std::ostringstream csv;
      wdro::write_csv(csv, recs);
      const std::filesystem::path dir(sweep_out);
      wdro::write_text_file((dir / "results.csv").string(), csv.str());
      wdro::write_text_file((dir / "results.json").string(),
                            wdro::records_to_json(recs).dump(2) + "\n");

      std::vector<wdro::RunRecord> l1, l2;
      for (const auto& r : recs)
        if (r.method == "TSDRO") (r.norm == wdro::Norm::kL1 ? l1 : l2).push_back(r);
      if (!l1.empty() && !l2.empty()) {
        nlohmann::json dom = nlohmann::json::array();
        for (const auto& row : wdro::dominance_stats(l1, l2))
          dom.push_back({{"epsilon", row.epsilon},
                         {"pairs", row.pairs},
                         {"prob_l2_not_worse", row.prob_l2_not_worse},
                         {"first_order_dominance", row.first_order_dominance},
                         {"l1_percentiles", {row.l1_p20, row.l1_p50, row.l1_p80}},
                         {"l2_percentiles", {row.l2_p20, row.l2_p50, row.l2_p80}}});
        wdro::write_text_file((dir / "dominance.json").string(), dom.dump(2) + "\n");
      }
      std::size_t incomplete = 0;
      for (const auto& r : recs)
        if (r.status != "Converged") ++incomplete;
      std::cerr << recs.size() << " records, " << incomplete << " not converged\n";
      return incomplete == 0 ? kExitOk : kExitIncomplete;
    }

    if (*verify) {
      const auto rep = wdro::verify_counterexample(verify_eps);
      std::printf("%10s %14s %14s %14s %10s  %-16s %s\n", "epsilon", "value", "expected",
                  "refuted", "lambda", "worst-case", "result");
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : rep.rows) {
        const std::string wc = r.worst_case.empty() ? "-" : format_vector(r.worst_case);
        std::printf("%10.4g %14.8f %14.8f %14.8f %10.6f  %-16s %s\n", r.epsilon, r.value,
                    r.expected, r.refuted, r.lambda, wc.c_str(), r.pass ? "PASS" : "FAIL");
        rows.push_back({{"epsilon", r.epsilon},
                        {"value", r.value},
                        {"expected", r.expected},
                        {"refuted", r.refuted},
                        {"lambda", r.lambda},
                        {"worst_case", r.worst_case},
                        {"pass", r.pass}});
      }
      if (!verify_out.empty()) wdro::write_text_file(verify_out, rows.dump(2) + "\n");
      return rep.all_pass ? kExitOk : kExitIncomplete;
    }

    if (*gen) {
      const auto inst = wdro::generate_instance(gen_i, gen_j, gen_seed);
      const std::string stem = gen_name.empty()
                                   ? "fl_" + std::to_string(gen_i) + "x" + std::to_string(gen_j)
                                   : gen_name;
      const std::filesystem::path dir(gen_out);
      std::filesystem::create_directories(dir);
      wdro::write_text_file((dir / (stem + ".txt")).string(), wdro::emit_holmberg(inst));
      const auto p = wdro::build_tsdro(wdro::apply_paper_modifications(inst), gen_eps,
                                       parse_norm(gen_norm), gen_n, gen_seed);
      wdro::write_text_file((dir / (stem + ".json")).string(), wdro::emit_problem(p));
      return kExitOk;
    }
  } catch (const wdro::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
