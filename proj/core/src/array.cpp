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

#include "qattenlab/array.hpp"

#include <cblas.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include "qattenlab/error.hpp"

extern "C" void openblas_set_num_threads(int);

namespace qattenlab {
namespace {

// Runs are budgeted for a single core; a threaded BLAS would oversubscribe it
// and break run-to-run determinism of timing-sensitive tests.
struct BlasSingleThreadPin {
  BlasSingleThreadPin() {
    setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
    openblas_set_num_threads(1);
  }
};
const BlasSingleThreadPin kBlasPin;

int volume(const std::vector<int>& shape) {
  int v = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
    v *= d;
  }
  return v;
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ")";
  return os.str();
}

Array Array::zeros(std::vector<int> shape) {
  Array a;
  int v = volume(shape);
  a.shape = std::move(shape);
  a.data.assign(static_cast<size_t>(v), 0.0);
  return a;
}

Array Array::full(std::vector<int> shape, double fill) {
  Array a = zeros(std::move(shape));
  for (double& x : a.data) x = fill;
  return a;
}

Array Array::scalar(double v) {
  Array a;
  a.shape = {1, 1};
  a.data = {v};
  return a;
}

Array Array::row(std::vector<double> values) {
  Array a;
  a.shape = {1, static_cast<int>(values.size())};
  a.data = std::move(values);
  return a;
}

Array Array::from(std::vector<int> shape, std::vector<double> data) {
  if (volume(shape) != static_cast<int>(data.size())) {
    throw ShapeError("Array::from: " + std::to_string(data.size()) +
                     " values do not fill shape " + shape_str(shape));
  }
  Array a;
  a.shape = std::move(shape);
  a.data = std::move(data);
  return a;
}

int Array::size() const { return static_cast<int>(data.size()); }

int Array::rows() const {
  if (rank() == 1) return 1;
  if (rank() == 2) return shape[0];
  throw ShapeError("matrix view of rank-" + std::to_string(rank()) + " array");
}

int Array::cols() const {
  if (rank() == 1) return shape[0];
  if (rank() == 2) return shape[1];
  throw ShapeError("matrix view of rank-" + std::to_string(rank()) + " array");
}

double& Array::at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
double Array::at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

bool Array::all_finite() const {
  for (double x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Array gemm(const Array& a, bool trans_a, const Array& b, bool trans_b) {
  const int m = trans_a ? a.cols() : a.rows();
  const int k = trans_a ? a.rows() : a.cols();
  const int kb = trans_b ? b.cols() : b.rows();
  const int n = trans_b ? b.rows() : b.cols();
  if (k != kb) {
    throw ShapeError("matmul inner-dimension mismatch: " + shape_str(a.shape) +
                     (trans_a ? "^T" : "") + " * " + shape_str(b.shape) +
                     (trans_b ? "^T" : ""));
  }
  Array c = Array::zeros({m, n});
  if (m == 0 || n == 0 || k == 0) return c;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, 1.0, a.data.data(),
              a.cols(), b.data.data(), b.cols(), 0.0, c.data.data(), n);
  return c;
}

Array matmul(const Array& a, const Array& b) { return gemm(a, false, b, false); }

void gemm_acc(const Array& a, bool trans_a, const Array& b, bool trans_b,
              Array& c) {
  const int m = trans_a ? a.cols() : a.rows();
  const int k = trans_a ? a.rows() : a.cols();
  const int kb = trans_b ? b.cols() : b.rows();
  const int n = trans_b ? b.rows() : b.cols();
  if (k != kb || c.rows() != m || c.cols() != n) {
    throw ShapeError("gemm_acc shape mismatch: " + shape_str(a.shape) +
                     (trans_a ? "^T" : "") + " * " + shape_str(b.shape) +
                     (trans_b ? "^T" : "") + " += into " + shape_str(c.shape));
  }
  if (m == 0 || n == 0 || k == 0) return;
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, 1.0, a.data.data(),
              a.cols(), b.data.data(), b.cols(), 1.0, c.data.data(), n);
}

void axpy(double alpha, const Array& x, Array& y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy size mismatch: " + shape_str(x.shape) + " into " +
                     shape_str(y.shape));
  }
  cblas_daxpy(x.size(), alpha, x.data.data(), 1, y.data.data(), 1);
}

}  // namespace qattenlab
