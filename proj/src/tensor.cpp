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

#include "tabad/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace tabad {

namespace {

void require_positive(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw std::invalid_argument("matrix dimensions must be positive, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols) {
  require_positive(rows, cols);
  data_.assign(rows * cols, fill);
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_positive(rows, cols);
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix storage size does not match " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  require_positive(rows_, cols_);
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Vector linear_forward(std::span<const double> input, const Matrix& weights,
                      std::span<const double> bias) {
  if (weights.cols() != input.size() || weights.rows() != bias.size()) {
    throw std::invalid_argument("linear_forward: weights " + shape_string(weights) +
                                " do not conform to input of length " +
                                std::to_string(input.size()) + " and bias of length " +
                                std::to_string(bias.size()));
  }
  Vector out(weights.rows());
  for (std::size_t o = 0; o < weights.rows(); ++o) {
    out[o] = kernels::dot(weights.row_span(o).data(), input.data(), input.size()) + bias[o];
  }
  return out;
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw std::invalid_argument("mse: length mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

namespace kernels {

double dot(const double* a, const double* b, std::size_t n) {
  // Four independent accumulators; fixed order keeps results reproducible.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void affine(const Matrix& x, const Matrix& w, const Matrix* b, Matrix& y) {
  const std::size_t n = x.rows(), in = x.cols(), out = w.rows();
  if (y.rows() != n || y.cols() != out) y = Matrix(n, out);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.row_span(r).data();
    double* yr = y.row_span(r).data();
    for (std::size_t o = 0; o < out; ++o) {
      yr[o] = dot(w.row_span(o).data(), xr, in) + (b ? (*b)(0, o) : 0.0);
    }
  }
}

void affine_backward_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  const std::size_t n = dy.rows(), out = w.rows(), in = w.cols();
  for (std::size_t r = 0; r < n; ++r) {
    double* dxr = dx.row_span(r).data();
    const double* dyr = dy.row_span(r).data();
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      const double* wr = w.row_span(o).data();
      for (std::size_t i = 0; i < in; ++i) dxr[i] += g * wr[i];
    }
  }
}

void affine_backward_weight(const Matrix& dy, const Matrix& x, Matrix& dw) {
  const std::size_t n = dy.rows(), out = dw.rows(), in = dw.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.row_span(r).data();
    const double* dyr = dy.row_span(r).data();
    for (std::size_t o = 0; o < out; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      double* dwr = dw.row_span(o).data();
      for (std::size_t i = 0; i < in; ++i) dwr[i] += g * xr[i];
    }
  }
}

}  // namespace kernels

}  // namespace tabad
