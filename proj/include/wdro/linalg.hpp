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

// Small dense linear-algebra vocabulary shared by every module. Problems in
// this library are desk scale, so a row-major std::vector backing is enough.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wdro/error.hpp"

namespace wdro {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Builds from an array of rows; every row must have the same length.
  static Matrix from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      require(rows[r].size() == m.cols_, ErrorCode::kDimensionMismatch,
              "ragged matrix row " + std::to_string(r));
      std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  Vector column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  std::vector<Vector> to_rows() const {
    std::vector<Vector> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
    return out;
  }

  // Appends a row; an empty matrix adopts the row's length as its width.
  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    require(values.size() == cols_, ErrorCode::kDimensionMismatch, "append_row width");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vector multiply(const Matrix& m, std::span<const double> v) {
  require(m.cols() == v.size(), ErrorCode::kDimensionMismatch, "matrix-vector product");
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
  return out;
}

// Computes mᵀv.
inline Vector multiply_transposed(const Matrix& m, std::span<const double> v) {
  require(m.rows() == v.size(), ErrorCode::kDimensionMismatch, "transposed product");
  Vector out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (v[r] == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += v[r] * row[c];
  }
  return out;
}

// Ground norms used for the Wasserstein transport cost.
enum class Norm { kL1, kL2, kLInf };

inline std::string norm_name(Norm p) {
  switch (p) {
    case Norm::kL1: return "1";
    case Norm::kL2: return "2";
    case Norm::kLInf: return "inf";
  }
  return "?";
}

inline Norm parse_norm(const std::string& text) {
  if (text == "1") return Norm::kL1;
  if (text == "2") return Norm::kL2;
  if (text == "inf" || text == "Inf" || text == "infinity") return Norm::kLInf;
  fail(ErrorCode::kInvalidArgument, "unknown norm '" + text + "' (expected 1, 2 or inf)");
}

// Hölder conjugate: the dual of l1 is l∞ and vice versa, l2 is self-dual.
constexpr Norm dual_norm(Norm p) {
  switch (p) {
    case Norm::kL1: return Norm::kLInf;
    case Norm::kL2: return Norm::kL2;
    case Norm::kLInf: return Norm::kL1;
  }
  return Norm::kL2;
}

inline double norm(std::span<const double> v, Norm p) {
  double s = 0.0;
  switch (p) {
    case Norm::kL1:
      for (double x : v) s += std::abs(x);
      return s;
    case Norm::kL2:
      for (double x : v) s += x * x;
      return std::sqrt(s);
    case Norm::kLInf:
      for (double x : v) s = std::max(s, std::abs(x));
      return s;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b, Norm p) {
  assert(a.size() == b.size());
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d, p);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Operator norm induced by l_p. For p=2 the Frobenius norm is returned, which
// upper-bounds the spectral norm; callers only need a certified bound there.
inline double operator_norm_bound(const Matrix& m, Norm p) {
  double best = 0.0;
  switch (p) {
    case Norm::kL1:
      for (std::size_t c = 0; c < m.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
        best = std::max(best, s);
      }
      return best;
    case Norm::kLInf:
      for (std::size_t r = 0; r < m.rows(); ++r) best = std::max(best, norm(m.row(r), Norm::kL1));
      return best;
    case Norm::kL2:
      for (double v : m.data()) best += v * v;
      return std::sqrt(best);
  }
  return best;
}

}  // namespace wdro
