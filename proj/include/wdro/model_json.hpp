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

// JSON instance schema:
//
//   {
//     "first_stage":  {"c": [..], "A": [[..]..], "b": [..], "lb": [..], "ub": [..],
//                      "integer_idx": [..]},
//     "second_stage": {"q": [..], "W": [[..]..], "cone": "nonneg",
//                      "row_types": [">=", "=", ..]},          // row_types optional
//     "uncertainty":  {"h0": [..], "H": [[..]..], "T0": [[..]..], "T_list": [[[..]..]..]},
//     "support":      {"l": [..], "u": [..]},                 // "inf" / "-inf" allowed
//     "ambiguity":    {"samples": [[..]..], "epsilon": 0.1, "norm_p": 1 | 2 | "inf"}
//   }
//
// Matrices are row-major arrays of rows. Any number may be written as the
// strings "inf" / "-inf". Doubles are emitted with round-trip precision, so
// parse(emit(p)) == p bit for bit.

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wdro/model.hpp"

namespace wdro {

using Json = nlohmann::json;

namespace detail {

inline Json number_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

inline double number_from_json(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Infinity") return -kInf;
  }
  fail(ErrorCode::kParseError, where + ": expected a number or \"inf\"/\"-inf\"");
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_to_json(x));
  return out;
}

inline Vector vector_from_json(const Json& j, const std::string& where) {
  require(j.is_array(), ErrorCode::kParseError, where + ": expected an array");
  Vector out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(Vector(m.row(r).begin(), m.row(r).end())));
  return out;
}

// An empty array gives a 0 x cols matrix.
inline Matrix matrix_from_json(const Json& j, const std::string& where, std::size_t cols) {
  require(j.is_array(), ErrorCode::kParseError, where + ": expected an array of rows");
  if (j.empty()) return Matrix(0, cols);
  std::vector<Vector> rows;
  for (std::size_t r = 0; r < j.size(); ++r)
    rows.push_back(vector_from_json(j[r], where + "[" + std::to_string(r) + "]"));
  try {
    return Matrix::from_rows(rows);
  } catch (const Error& e) {
    fail(ErrorCode::kParseError, where + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  require(j.is_object(), ErrorCode::kParseError, where + ": expected an object");
  const auto it = j.find(key);
  require(it != j.end(), ErrorCode::kParseError, where + ": missing field '" + key + "'");
  return *it;
}

inline std::string cone_name(ConeKind c) {
  switch (c) {
    case ConeKind::kNonnegativeOrthant: return "nonneg";
    case ConeKind::kSecondOrder: return "soc";
    case ConeKind::kSemidefinite: return "psd";
  }
  return "nonneg";
}

inline ConeKind parse_cone(const std::string& s) {
  if (s == "nonneg" || s == "orthant") return ConeKind::kNonnegativeOrthant;
  if (s == "soc") return ConeKind::kSecondOrder;
  if (s == "psd") return ConeKind::kSemidefinite;
  fail(ErrorCode::kParseError, "second_stage.cone: unknown cone '" + s + "'");
}

}  // namespace detail

inline Json to_json(const TwoStageProblem& p) {
  using namespace detail;
  const auto& f = p.first_stage();
  const auto& s = p.second_stage();
  const auto& u = p.uncertainty();
  Json j;
  j["first_stage"] = {{"c", vector_to_json(f.cost)},
                      {"A", matrix_to_json(f.a)},
                      {"b", vector_to_json(f.b)},
                      {"lb", vector_to_json(f.lower)},
                      {"ub", vector_to_json(f.upper)},
                      {"integer_idx", f.integer_idx}};
  j["second_stage"] = {{"q", vector_to_json(s.cost)},
                       {"W", matrix_to_json(s.w)},
                       {"cone", cone_name(s.cone)}};
  if (!s.row_types.empty()) {
    Json rt = Json::array();
    for (auto t : s.row_types) rt.push_back(t == RecourseRow::kEqual ? "=" : ">=");
    j["second_stage"]["row_types"] = rt;
  }
  Json tl = Json::array();
  for (const auto& t : u.t_list) tl.push_back(matrix_to_json(t));
  j["uncertainty"] = {{"h0", vector_to_json(u.h0)},
                      {"H", matrix_to_json(u.h)},
                      {"T0", matrix_to_json(u.t0)},
                      {"T_list", tl}};
  j["support"] = {{"l", vector_to_json(p.support().lower)},
                  {"u", vector_to_json(p.support().upper)}};
  if (p.support().kind != SupportKind::kBox) j["support"]["kind"] = "convex";
  Json samples = Json::array();
  for (const auto& z : p.ambiguity().samples) samples.push_back(vector_to_json(z));
  Json norm_p;
  switch (p.norm()) {
    case Norm::kL1: norm_p = 1; break;
    case Norm::kL2: norm_p = 2; break;
    case Norm::kLInf: norm_p = "inf"; break;
  }
  j["ambiguity"] = {{"samples", samples}, {"epsilon", p.epsilon()}, {"norm_p", norm_p}};
  return j;
}

inline TwoStageProblem problem_from_json(const Json& j) {
  using namespace detail;
  const auto& jf = field(j, "first_stage", "instance");
  FirstStage f;
  f.cost = vector_from_json(field(jf, "c", "first_stage"), "first_stage.c");
  const std::size_t n = f.cost.size();
  f.a = matrix_from_json(field(jf, "A", "first_stage"), "first_stage.A", n);
  f.b = vector_from_json(field(jf, "b", "first_stage"), "first_stage.b");
  f.lower = vector_from_json(field(jf, "lb", "first_stage"), "first_stage.lb");
  f.upper = vector_from_json(field(jf, "ub", "first_stage"), "first_stage.ub");
  if (jf.contains("integer_idx")) {
    const auto& ji = jf["integer_idx"];
    require(ji.is_array(), ErrorCode::kParseError, "first_stage.integer_idx: expected an array");
    for (const auto& v : ji) {
      require(v.is_number_unsigned(), ErrorCode::kParseError,
              "first_stage.integer_idx: expected nonnegative integers");
      f.integer_idx.push_back(v.get<std::size_t>());
    }
  }

  const auto& js = field(j, "second_stage", "instance");
  SecondStage s;
  s.cost = vector_from_json(field(js, "q", "second_stage"), "second_stage.q");
  s.w = matrix_from_json(field(js, "W", "second_stage"), "second_stage.W", s.cost.size());
  if (js.contains("cone")) {
    require(js["cone"].is_string(), ErrorCode::kParseError, "second_stage.cone: expected a string");
    s.cone = parse_cone(js["cone"].get<std::string>());
  }
  if (js.contains("row_types")) {
    for (const auto& t : js["row_types"]) {
      const auto v = t.is_string() ? t.get<std::string>() : std::string();
      if (v == ">=") s.row_types.push_back(RecourseRow::kGreaterEqual);
      else if (v == "=") s.row_types.push_back(RecourseRow::kEqual);
      else fail(ErrorCode::kParseError, "second_stage.row_types: expected \">=\" or \"=\"");
    }
  }

  const auto& ju = field(j, "uncertainty", "instance");
  const auto& jsup = field(j, "support", "instance");
  BoxSupport box;
  box.lower = vector_from_json(field(jsup, "l", "support"), "support.l");
  box.upper = vector_from_json(field(jsup, "u", "support"), "support.u");
  if (jsup.contains("kind") && jsup["kind"] != "box") box.kind = SupportKind::kConvexSet;
  const std::size_t k = box.lower.size();

  UncertaintyAffineMap u;
  u.h0 = vector_from_json(field(ju, "h0", "uncertainty"), "uncertainty.h0");
  u.h = matrix_from_json(field(ju, "H", "uncertainty"), "uncertainty.H", n);
  u.t0 = matrix_from_json(field(ju, "T0", "uncertainty"), "uncertainty.T0", k);
  if (ju.contains("T_list")) {
    const auto& jt = ju["T_list"];
    require(jt.is_array(), ErrorCode::kParseError, "uncertainty.T_list: expected an array");
    for (std::size_t i = 0; i < jt.size(); ++i)
      u.t_list.push_back(
          matrix_from_json(jt[i], "uncertainty.T_list[" + std::to_string(i) + "]", k));
  }

  const auto& ja = field(j, "ambiguity", "instance");
  AmbiguitySet amb;
  const auto& jsamples = field(ja, "samples", "ambiguity");
  require(jsamples.is_array(), ErrorCode::kParseError, "ambiguity.samples: expected an array");
  for (std::size_t i = 0; i < jsamples.size(); ++i)
    amb.samples.push_back(
        vector_from_json(jsamples[i], "ambiguity.samples[" + std::to_string(i) + "]"));
  amb.epsilon = number_from_json(field(ja, "epsilon", "ambiguity"), "ambiguity.epsilon");
  const auto& jn = field(ja, "norm_p", "ambiguity");
  try {
    if (jn.is_number()) {
      amb.norm = parse_norm(std::to_string(jn.get<int>()));
    } else {
      require(jn.is_string(), ErrorCode::kParseError, "ambiguity.norm_p: expected 1, 2 or \"inf\"");
      amb.norm = parse_norm(jn.get<std::string>());
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    fail(ErrorCode::kParseError, std::string("ambiguity.norm_p: ") + e.what());
  }
  return TwoStageProblem(std::move(f), std::move(s), std::move(u), std::move(box),
                         std::move(amb));
}

inline std::string emit_problem(const TwoStageProblem& p) { return to_json(p).dump(2) + "\n"; }

inline TwoStageProblem parse_problem(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kParseError, std::string("malformed JSON: ") + e.what());
  }
  return problem_from_json(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIoError, "write failed for '" + path + "'");
}

inline TwoStageProblem load_problem(const std::string& path) {
  return parse_problem(read_text_file(path));
}

}  // namespace wdro
