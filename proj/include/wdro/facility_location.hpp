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

// Capacitated facility location with uncertain demand:
//
//   min fᵀx + E[Z(x, ξ)],  Z(x, ξ) = min Σ c_ij y_ij
//                          s.t. Σ_i y_ij >= ξ_j,  Σ_j y_ij <= b_i x_i,  y >= 0
//
// x ∈ [0, 1]^I is the relaxed opening decision. The first stage carries the
// valid cut Σ_i b_i x_i >= Σ_j l_j as Σ_i b_i x_i - s = Σ_j l_j with a slack
// s ∈ [0, Σb - Σl], so x is followed by s in the variable vector.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wdro/algorithm.hpp"
#include "wdro/error.hpp"
#include "wdro/linalg.hpp"
#include "wdro/model.hpp"

namespace wdro {

struct FlInstance {
  std::size_t facilities = 0;  // I
  std::size_t customers = 0;   // J
  Vector open_cost;            // f, length I
  Matrix ship_cost;            // c, I x J (cost per unit shipped)
  Vector capacity;             // b, length I
  Vector nominal_demand;       // length J
  Vector demand_lower, demand_upper;
  Vector gamma_shape, gamma_scale;
  bool relax_binaries = false;

  void validate() const {
    const std::size_t i = facilities, j = customers;
    require(i > 0 && j > 0, ErrorCode::kInvalidArgument, "empty facility-location instance");
    require(open_cost.size() == i && capacity.size() == i, ErrorCode::kDimensionMismatch,
            "per-facility vectors must have length I");
    require(ship_cost.rows() == i && ship_cost.cols() == j, ErrorCode::kDimensionMismatch,
            "cost matrix must be I x J");
    require(nominal_demand.size() == j && demand_lower.size() == j && demand_upper.size() == j &&
                gamma_shape.size() == j && gamma_scale.size() == j,
            ErrorCode::kDimensionMismatch, "per-customer vectors must have length J");
    for (std::size_t a = 0; a < i; ++a) {
      require(open_cost[a] >= 0.0 && capacity[a] >= 0.0, ErrorCode::kInvalidArgument,
              "costs and capacities must be nonnegative");
      for (std::size_t b = 0; b < j; ++b)
        require(ship_cost(a, b) >= 0.0, ErrorCode::kInvalidArgument,
                "shipping costs must be nonnegative");
    }
    double sum_b = 0.0, sum_l = 0.0;
    for (double v : capacity) sum_b += v;
    for (std::size_t b = 0; b < j; ++b) {
      require(std::isfinite(demand_lower[b]) && std::isfinite(demand_upper[b]) &&
                  demand_lower[b] <= demand_upper[b],
              ErrorCode::kInvalidArgument, "demand box must satisfy l <= u");
      require(gamma_shape[b] > 0.0 && gamma_scale[b] > 0.0, ErrorCode::kInvalidArgument,
              "gamma parameters must be positive");
      sum_l += demand_lower[b];
    }
    require(sum_b >= sum_l, ErrorCode::kInfeasibleCapacity,
            "total capacity " + std::to_string(sum_b) + " is below the total minimum demand " +
                std::to_string(sum_l));
  }
};

inline constexpr double kDemandCv = 0.5;
inline constexpr double kDemandBoxFactor = 2.0;

// Box [0, 2d_j] and gamma with mean d_j and coefficient of variation 0.5.
inline void set_demand_model(FlInstance& inst) {
  const std::size_t j = inst.customers;
  inst.demand_lower.assign(j, 0.0);
  inst.demand_upper.resize(j);
  inst.gamma_shape.resize(j);
  inst.gamma_scale.resize(j);
  const double shape = 1.0 / (kDemandCv * kDemandCv);
  for (std::size_t b = 0; b < j; ++b) {
    const double d = inst.nominal_demand[b];
    inst.demand_upper[b] = kDemandBoxFactor * d;
    inst.gamma_shape[b] = shape;
    inst.gamma_scale[b] = d > 0.0 ? d / shape : 1e-12;
  }
}

namespace detail {

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : text_(text) {}

  double number(const char* what) {
    skip_space();
    if (pos_ >= text_.size())
      fail(ErrorCode::kParseError, where() + ": unexpected end of input, expected " + what);
    const std::size_t start = pos_, line = line_, col = col_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
    const std::string tok = text_.substr(start, pos_ - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !std::isfinite(v))
      fail(ErrorCode::kParseError, "line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": expected " + what + ", got '" +
                                       tok + "'");
    return v;
  }

  std::size_t count(const char* what) {
    const std::size_t line = line_, col = col_;
    const double v = number(what);
    if (v < 0.0 || v != std::floor(v))
      fail(ErrorCode::kParseError, "line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": " + what +
                                       " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  void expect_end() {
    skip_space();
    if (pos_ < text_.size())
      fail(ErrorCode::kParseError, where() + ": trailing content after the cost matrix");
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }
  std::string where() const {
    return "line " + std::to_string(line_) + ", column " + std::to_string(col_);
  }

  const std::string& text_;
  std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

}  // namespace detail

// Holmberg layout, whitespace separated:
//   I J
//   I lines "capacity open_cost"
//   J demands
//   I x J shipping costs, one facility per row
inline FlInstance parse_holmberg(const std::string& text) {
  detail::TokenReader in(text);
  FlInstance inst;
  inst.facilities = in.count("facility count");
  inst.customers = in.count("customer count");
  require(inst.facilities > 0 && inst.customers > 0, ErrorCode::kParseError,
          "facility and customer counts must be positive");
  const std::size_t i = inst.facilities, j = inst.customers;
  inst.capacity.resize(i);
  inst.open_cost.resize(i);
  for (std::size_t a = 0; a < i; ++a) {
    inst.capacity[a] = in.number("capacity");
    inst.open_cost[a] = in.number("opening cost");
  }
  inst.nominal_demand.resize(j);
  for (auto& d : inst.nominal_demand) d = in.number("demand");
  inst.ship_cost = Matrix(i, j);
  for (std::size_t a = 0; a < i; ++a)
    for (std::size_t b = 0; b < j; ++b) inst.ship_cost(a, b) = in.number("shipping cost");
  in.expect_end();
  set_demand_model(inst);
  inst.validate();
  return inst;
}

inline std::string emit_holmberg(const FlInstance& inst) {
  std::ostringstream out;
  out.precision(17);
  out << inst.facilities << ' ' << inst.customers << '\n';
  for (std::size_t a = 0; a < inst.facilities; ++a)
    out << inst.capacity[a] << ' ' << inst.open_cost[a] << '\n';
  for (std::size_t b = 0; b < inst.customers; ++b)
    out << inst.nominal_demand[b] << (b + 1 == inst.customers ? '\n' : ' ');
  for (std::size_t a = 0; a < inst.facilities; ++a)
    for (std::size_t b = 0; b < inst.customers; ++b)
      out << inst.ship_cost(a, b) << (b + 1 == inst.customers ? '\n' : ' ');
  return out.str();
}

// Scales shipping costs by 0.001 and marks x as relaxed. Not idempotent.
inline FlInstance apply_paper_modifications(FlInstance inst) {
  for (std::size_t a = 0; a < inst.facilities; ++a)
    for (std::size_t b = 0; b < inst.customers; ++b) inst.ship_cost(a, b) *= 0.001;
  inst.relax_binaries = true;
  return inst;
}

// n i.i.d. demand vectors; gamma per coordinate, clamped to [l_j, u_j].
inline std::vector<Vector> sample_demands(const FlInstance& inst, std::size_t n,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::gamma_distribution<double>> dists;
  for (std::size_t b = 0; b < inst.customers; ++b)
    dists.emplace_back(inst.gamma_shape[b], inst.gamma_scale[b]);
  std::vector<Vector> out(n, Vector(inst.customers));
  for (auto& v : out)
    for (std::size_t b = 0; b < inst.customers; ++b)
      v[b] = std::clamp(dists[b](rng), inst.demand_lower[b], inst.demand_upper[b]);
  return out;
}

// Unmet-demand and over-capacity slacks cost ten times the most expensive
// way of serving one unit (shipping plus opening per unit of capacity).
inline double fl_slack_penalty(const FlInstance& inst) {
  double worst = 1.0;
  for (std::size_t a = 0; a < inst.facilities; ++a)
    for (std::size_t b = 0; b < inst.customers; ++b) {
      const double per_unit =
          inst.capacity[a] > 0.0 ? inst.open_cost[a] / inst.capacity[a] : inst.open_cost[a];
      worst = std::max(worst, inst.ship_cost(a, b) + per_unit);
    }
  return 10.0 * worst;
}

// The radius actually used: ε, or ε/√J for the l2 ground norm.
inline double fl_radius(const FlInstance& inst, double epsilon, Norm norm) {
  return norm == Norm::kL2 ? epsilon / std::sqrt(static_cast<double>(inst.customers)) : epsilon;
}

inline TwoStageProblem build_tsdro(const FlInstance& inst, double epsilon, Norm norm,
                                   std::vector<Vector> samples) {
  inst.validate();
  require(!samples.empty(), ErrorCode::kInvalidArgument, "at least one training sample is needed");
  const std::size_t ni = inst.facilities, nj = inst.customers;
  double sum_b = 0.0, sum_l = 0.0;
  for (double v : inst.capacity) sum_b += v;
  for (double v : inst.demand_lower) sum_l += v;

  FirstStage f;
  f.cost = inst.open_cost;
  f.cost.push_back(0.0);
  f.a = Matrix(1, ni + 1);
  for (std::size_t a = 0; a < ni; ++a) f.a(0, a) = inst.capacity[a];
  f.a(0, ni) = -1.0;
  f.b = {sum_l};
  f.lower.assign(ni + 1, 0.0);
  f.upper.assign(ni, 1.0);
  f.upper.push_back(sum_b - sum_l);
  if (!inst.relax_binaries)
    for (std::size_t a = 0; a < ni; ++a) f.integer_idx.push_back(a);

  SecondStage s;
  s.cost.resize(ni * nj);
  s.w = Matrix(nj + ni, ni * nj);
  for (std::size_t a = 0; a < ni; ++a)
    for (std::size_t b = 0; b < nj; ++b) {
      const std::size_t col = a * nj + b;
      s.cost[col] = inst.ship_cost(a, b);
      s.w(b, col) = 1.0;
      s.w(nj + a, col) = -1.0;
    }

  UncertaintyAffineMap map;
  map.h0.assign(nj + ni, 0.0);
  map.h = Matrix(nj + ni, ni + 1);
  for (std::size_t a = 0; a < ni; ++a) map.h(nj + a, a) = -inst.capacity[a];
  map.t0 = Matrix(nj + ni, nj);
  for (std::size_t b = 0; b < nj; ++b) map.t0(b, b) = 1.0;

  BoxSupport box{inst.demand_lower, inst.demand_upper};
  AmbiguitySet amb{std::move(samples), fl_radius(inst, epsilon, norm), norm};
  TwoStageProblem base(std::move(f), std::move(s), std::move(map), std::move(box),
                       std::move(amb));
  return augment_with_slacks(base, fl_slack_penalty(inst));
}

inline TwoStageProblem build_tsdro(const FlInstance& inst, double epsilon, Norm norm,
                                   std::size_t n_train, std::uint64_t seed) {
  require(n_train >= 1, ErrorCode::kInvalidArgument, "N_train must be at least 1");
  return build_tsdro(inst, epsilon, norm, sample_demands(inst, n_train, seed));
}

// Extensive-form SAA over the given samples with x relaxed to [0, 1].
inline SaaSolution saa_solve(const FlInstance& inst, std::vector<Vector> samples) {
  FlInstance relaxed = inst;
  relaxed.relax_binaries = true;
  return saa_extensive_form(build_tsdro(relaxed, 1.0, Norm::kL1, std::move(samples)));
}

// Synthetic instance in Holmberg units: points in the unit square, shipping
// cost 10000 per unit distance, capacities summing to 3x nominal demand.
inline FlInstance generate_instance(std::size_t facilities, std::size_t customers,
                                    std::uint64_t seed) {
  require(facilities > 0 && customers > 0, ErrorCode::kInvalidArgument,
          "facility and customer counts must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FlInstance inst;
  inst.facilities = facilities;
  inst.customers = customers;
  std::vector<std::pair<double, double>> fp(facilities), cp(customers);
  for (auto& p : fp) p = {unit(rng), unit(rng)};
  for (auto& p : cp) p = {unit(rng), unit(rng)};
  inst.nominal_demand.resize(customers);
  double total = 0.0;
  for (auto& d : inst.nominal_demand) total += d = std::round(5.0 + 30.0 * unit(rng));
  inst.capacity.resize(facilities);
  Vector share(facilities);
  double share_sum = 0.0;
  for (auto& w : share) share_sum += w = 0.5 + unit(rng);
  for (std::size_t a = 0; a < facilities; ++a)
    inst.capacity[a] = std::round(3.0 * total * share[a] / share_sum);
  inst.open_cost.resize(facilities);
  for (std::size_t a = 0; a < facilities; ++a)
    inst.open_cost[a] = std::round(50.0 * std::sqrt(inst.capacity[a]) + 100.0 * unit(rng));
  inst.ship_cost = Matrix(facilities, customers);
  for (std::size_t a = 0; a < facilities; ++a)
    for (std::size_t b = 0; b < customers; ++b)
      inst.ship_cost(a, b) = std::round(10000.0 * std::hypot(fp[a].first - cp[b].first,
                                                             fp[a].second - cp[b].second));
  set_demand_model(inst);
  inst.validate();
  return inst;
}

}  // namespace wdro
