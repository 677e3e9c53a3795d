// tipm/common.hpp

// Copyright 2026 The tipm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TIPM_COMMON_HPP_
#define TIPM_COMMON_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tipm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, dimensions, sizes).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Vector = std::vector<double>;

/// Dense row-major matrix. Used for the small D x D products of the
/// alignment code and for S x D point blocks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix Identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  const std::vector<double> &data() const { return data_; }
  std::vector<double> &data() { return data_; }

  Matrix Transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  bool operator==(const Matrix &other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b.
inline Matrix Multiply(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows()) throw InputError("Multiply: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

/// a^T * b, accumulated over rows of a and b in ascending order.
inline Matrix MultiplyTransposed(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows()) throw InputError("MultiplyTransposed: row counts differ");
  Matrix out(a.cols(), b.cols());
  for (std::size_t s = 0; s < a.rows(); ++s)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ai = a(s, i);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += ai * b(s, j);
    }
  return out;
}

inline double FrobeniusNormSquared(const Matrix &m) {
  double acc = 0.0;
  for (double v : m.data()) acc += v * v;
  return acc;
}

inline double FrobeniusNorm(const Matrix &m) { return std::sqrt(FrobeniusNormSquared(m)); }

/// ||a - b||_F.
inline double FrobeniusDistance(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("FrobeniusDistance: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// ||M^T M - I||_F.
inline double OrthogonalityDefect(const Matrix &m) {
  Matrix g = MultiplyTransposed(m, m);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) -= 1.0;
  return FrobeniusNorm(g);
}

inline double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace tipm

#endif  // TIPM_COMMON_HPP_
