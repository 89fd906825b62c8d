// Copyright 2026 The QattenLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QATTENLAB_ARRAY_HPP_
#define QATTENLAB_ARRAY_HPP_

#include <initializer_list>
#include <string>
#include <vector>

namespace qattenlab {

// Dense row-major array of doubles. Differentiable operations treat every
// array as a matrix of shape (rows, cols); a rank-1 shape {n} is interpreted
// as a single row where a matrix is expected (biases, flat feature vectors).
//
// All learning-facing state in this library is 64-bit: parameter values,
// activations, gradients, and optimizer accumulators.
struct Array {
  std::vector<int> shape;
  std::vector<double> data;

  Array() = default;

  static Array zeros(std::vector<int> shape);
  static Array full(std::vector<int> shape, double fill);
  static Array scalar(double v);
  // Builds a (1, n) row from the given values.
  static Array row(std::vector<double> values);
  // Wraps an existing flat buffer; data.size() must match the shape volume.
  static Array from(std::vector<int> shape, std::vector<double> data);

  int size() const;
  int rank() const { return static_cast<int>(shape.size()); }
  // Matrix view: rank-1 {n} reads as (1, n); rank-2 {r, c} as (r, c).
  int rows() const;
  int cols() const;

  double& at(int r, int c);
  double at(int r, int c) const;
  double& operator[](int i) { return data[static_cast<size_t>(i)]; }
  double operator[](int i) const { return data[static_cast<size_t>(i)]; }

  bool same_shape(const Array& other) const { return shape == other.shape; }
  bool all_finite() const;
};

// C = A * B for matrix views of A (m,k) and B (k,n). Throws ShapeError on an
// inner-dimension mismatch. Backed by a single-threaded BLAS dgemm.
Array matmul(const Array& a, const Array& b);

// C = A * B with optional transposes; shapes are those of the operands as
// stored (so gemm(A, true, B, false) computes A^T * B). Used by the tape's
// backward pass, which needs all three layouts.
Array gemm(const Array& a, bool trans_a, const Array& b, bool trans_b);

// C += A * B, accumulating into an existing C of the right shape. Lets the
// backward pass add matmul gradient contributions without temporaries.
void gemm_acc(const Array& a, bool trans_a, const Array& b, bool trans_b,
              Array& c);

// In-place axpy over the flat buffers: y += alpha * x. Shapes must match.
void axpy(double alpha, const Array& x, Array& y);

std::string shape_str(const std::vector<int>& shape);

}  // namespace qattenlab

#endif  // QATTENLAB_ARRAY_HPP_
