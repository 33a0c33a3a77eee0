/* Copyright (c) 2026 The tabad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tabad {

using Vector = std::vector<double>;

/// Thrown when a value stops being finite (diverged optimizer, bad input).
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. Both dimensions are strictly positive.
///
/// Batched quantities put one sample per row, so a single vector is a 1 x n
/// matrix throughout the autodiff code.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix row(std::span<const double> values);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row_span(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row_span(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

/// W·x + b for a single vector. `weights` is out x in.
Vector linear_forward(std::span<const double> input, const Matrix& weights,
                      std::span<const double> bias);

/// Mean of element-wise squared differences.
double mse(std::span<const double> a, std::span<const double> b);

namespace kernels {

// Y = X·Wᵀ + b, with X: n x in, W: out x in, b: 1 x out. Y is resized.
void affine(const Matrix& x, const Matrix& w, const Matrix* b, Matrix& y);
// dX += dY·W
void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx);
// dW += dYᵀ·X
void affine_backward_weight(const Matrix& dy, const Matrix& x, Matrix& dw);

double dot(const double* a, const double* b, std::size_t n);

}  // namespace kernels

}  // namespace tabad
