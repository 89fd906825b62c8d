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

#include "qattenlab/tape.hpp"

#include <algorithm>
#include <cmath>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

void require_same_shape(const Array& a, const Array& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                     " vs " + shape_str(b.shape));
  }
}

}  // namespace

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  grads_valid_ = false;
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw ContractError("node id " + std::to_string(id) + " is not on this tape");
  }
}

const Tape::Node& Tape::node(NodeId id) const {
  check_id(id);
  return nodes_[static_cast<size_t>(id)];
}

const Array& Tape::val(NodeId id) const { return node(id).value; }

NodeId Tape::constant(Array value) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::param(const ParamStore& store, const std::string& name) {
  auto it = param_leaves_.find(name);
  if (it != param_leaves_.end()) return it->second;
  Node n;
  n.op = Op::kLeaf;
  n.value = store.value(name);
  n.param = static_cast<int>(param_names_.size());
  param_names_.push_back(name);
  NodeId id = push(std::move(n));
  param_leaves_.emplace(name, id);
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kMatMul;
  n.a = a;
  n.b = b;
  n.value = qattenlab::matmul(val(a), val(b));
  return push(std::move(n));
}

NodeId Tape::add_bias(NodeId a, NodeId bias) {
  const Array& x = val(a);
  const Array& c = val(bias);
  if (c.rows() != 1 || c.cols() != x.cols()) {
    throw ShapeError("add_bias: bias " + shape_str(c.shape) +
                     " does not broadcast over " + shape_str(x.shape));
  }
  Node n;
  n.op = Op::kAddBias;
  n.a = a;
  n.b = bias;
  n.value = x;
  for (int r = 0; r < x.rows(); ++r) {
    for (int j = 0; j < x.cols(); ++j) n.value.at(r, j) += c[j];
  }
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Array& x = val(a);
  const Array& y = val(b);
  require_same_shape(x, y, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value = x;
  axpy(1.0, y, n.value);
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Array& x = val(a);
  const Array& y = val(b);
  require_same_shape(x, y, "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.value = x;
  axpy(-1.0, y, n.value);
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Array& x = val(a);
  const Array& y = val(b);
  require_same_shape(x, y, "mul");
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.value = x;
  for (int i = 0; i < n.value.size(); ++i) n.value[i] *= y[i];
  return push(std::move(n));
}

NodeId Tape::bcast_col_mul(NodeId col, NodeId mat) {
  const Array& c = val(col);
  const Array& x = val(mat);
  if (c.cols() != 1 || c.rows() != x.rows()) {
    throw ShapeError("bcast_col_mul: column " + shape_str(c.shape) +
                     " does not broadcast over " + shape_str(x.shape));
  }
  Node n;
  n.op = Op::kBcastColMul;
  n.a = col;
  n.b = mat;
  n.value = x;
  for (int r = 0; r < x.rows(); ++r) {
    const double s = c.at(r, 0);
    for (int j = 0; j < x.cols(); ++j) n.value.at(r, j) *= s;
  }
  return push(std::move(n));
}

NodeId Tape::scalar_mul(double c, NodeId a) {
  Node n;
  n.op = Op::kScalarMul;
  n.a = a;
  n.scalar = c;
  n.value = val(a);
  for (double& x : n.value.data) x *= c;
  return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.data) x = x > 0.0 ? x : 0.0;
  return push(std::move(n));
}

NodeId Tape::abs(NodeId a) {
  Node n;
  n.op = Op::kAbs;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.data) x = std::fabs(x);
  return push(std::move(n));
}

NodeId Tape::sigmoid(NodeId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.data) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

NodeId Tape::tanh(NodeId a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.value = val(a);
  for (double& x : n.value.data) x = std::tanh(x);
  return push(std::move(n));
}

NodeId Tape::softmax_rows(NodeId a) {
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a;
  n.value = val(a);
  Array& y = n.value;
  for (int r = 0; r < y.rows(); ++r) {
    double mx = y.at(r, 0);
    for (int j = 1; j < y.cols(); ++j) mx = std::max(mx, y.at(r, j));
    double sum = 0.0;
    for (int j = 0; j < y.cols(); ++j) {
      y.at(r, j) = std::exp(y.at(r, j) - mx);
      sum += y.at(r, j);
    }
    for (int j = 0; j < y.cols(); ++j) y.at(r, j) /= sum;
  }
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Array& x = val(a);
  const Array& y = val(b);
  if (x.rows() != y.rows()) {
    throw ShapeError("concat_cols: row mismatch " + shape_str(x.shape) + " vs " +
                     shape_str(y.shape));
  }
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.value = Array::zeros({x.rows(), x.cols() + y.cols()});
  for (int r = 0; r < x.rows(); ++r) {
    for (int j = 0; j < x.cols(); ++j) n.value.at(r, j) = x.at(r, j);
    for (int j = 0; j < y.cols(); ++j) n.value.at(r, x.cols() + j) = y.at(r, j);
  }
  return push(std::move(n));
}

NodeId Tape::slice_cols(NodeId a, int c0, int c1) {
  const Array& x = val(a);
  if (c0 < 0 || c1 > x.cols() || c0 >= c1) {
    throw ShapeError("slice_cols: [" + std::to_string(c0) + ", " +
                     std::to_string(c1) + ") out of range for " +
                     shape_str(x.shape));
  }
  Node n;
  n.op = Op::kSliceCols;
  n.a = a;
  n.i0 = c0;
  n.i1 = c1;
  n.value = Array::zeros({x.rows(), c1 - c0});
  for (int r = 0; r < x.rows(); ++r) {
    for (int j = c0; j < c1; ++j) n.value.at(r, j - c0) = x.at(r, j);
  }
  return push(std::move(n));
}

NodeId Tape::slice_rows(NodeId a, int r0, int r1) {
  const Array& x = val(a);
  if (r0 < 0 || r1 > x.rows() || r0 > r1) {
    throw ShapeError("slice_rows: [" + std::to_string(r0) + ", " +
                     std::to_string(r1) + ") out of range for " +
                     shape_str(x.shape));
  }
  Node n;
  n.op = Op::kSliceRows;
  n.a = a;
  n.i0 = r0;
  n.i1 = r1;
  n.value = Array::zeros({r1 - r0, x.cols()});
  std::copy(x.data.begin() + static_cast<size_t>(r0) * x.cols(),
            x.data.begin() + static_cast<size_t>(r1) * x.cols(),
            n.value.data.begin());
  return push(std::move(n));
}

NodeId Tape::stack_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ContractError("stack_rows: no parts");
  const int cols = val(parts[0]).cols();
  int rows = 0;
  for (NodeId p : parts) {
    const Array& x = val(p);
    if (x.cols() != cols) {
      throw ShapeError("stack_rows: column mismatch, " + shape_str(x.shape) +
                       " after width " + std::to_string(cols));
    }
    rows += x.rows();
  }
  Node n;
  n.op = Op::kStackRows;
  n.parts = parts;
  n.value = Array::zeros({rows, cols});
  size_t off = 0;
  for (NodeId p : parts) {
    const Array& x = val(p);
    std::copy(x.data.begin(), x.data.end(), n.value.data.begin() + off);
    off += x.data.size();
  }
  return push(std::move(n));
}

NodeId Tape::row_dot_group(NodeId keys, NodeId query, int group) {
  const Array& k = val(keys);
  const Array& q = val(query);
  if (group <= 0 || k.rows() != q.rows() * group || k.cols() != q.cols()) {
    throw ShapeError("row_dot_group: keys " + shape_str(k.shape) +
                     " incompatible with query " + shape_str(q.shape) +
                     " and group " + std::to_string(group));
  }
  Node n;
  n.op = Op::kRowDotGroup;
  n.a = keys;
  n.b = query;
  n.i0 = group;
  n.value = Array::zeros({q.rows(), group});
  const int d = q.cols();
  for (int r = 0; r < q.rows(); ++r) {
    const double* qr = q.data.data() + static_cast<size_t>(r) * d;
    for (int g = 0; g < group; ++g) {
      const double* kr = k.data.data() + (static_cast<size_t>(r) * group + g) * d;
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += kr[j] * qr[j];
      n.value.at(r, g) = dot;
    }
  }
  return push(std::move(n));
}

NodeId Tape::gather_cols(NodeId a, std::vector<int> index) {
  const Array& x = val(a);
  if (static_cast<int>(index.size()) != x.rows()) {
    throw ShapeError("gather_cols: " + std::to_string(index.size()) +
                     " indices for " + std::to_string(x.rows()) + " rows");
  }
  for (int r = 0; r < x.rows(); ++r) {
    if (index[static_cast<size_t>(r)] < 0 || index[static_cast<size_t>(r)] >= x.cols()) {
      throw ContractError("gather_cols: index " +
                          std::to_string(index[static_cast<size_t>(r)]) +
                          " out of range at row " + std::to_string(r));
    }
  }
  Node n;
  n.op = Op::kGatherCols;
  n.a = a;
  n.index = std::move(index);
  n.value = Array::zeros({x.rows(), 1});
  for (int r = 0; r < x.rows(); ++r) n.value.at(r, 0) = x.at(r, n.index[static_cast<size_t>(r)]);
  return push(std::move(n));
}

NodeId Tape::sum_rows(NodeId a) {
  const Array& x = val(a);
  Node n;
  n.op = Op::kSumRows;
  n.a = a;
  n.value = Array::zeros({x.rows(), 1});
  for (int r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (int j = 0; j < x.cols(); ++j) s += x.at(r, j);
    n.value.at(r, 0) = s;
  }
  return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
  const Array& x = val(a);
  double s = 0.0;
  for (double v : x.data) s += v;
  Node n;
  n.op = Op::kSumAll;
  n.a = a;
  n.value = Array::scalar(s);
  return push(std::move(n));
}

NodeId Tape::mean_all(NodeId a) {
  const Array& x = val(a);
  if (x.size() == 0) throw ContractError("mean_all over an empty array");
  double s = 0.0;
  for (double v : x.data) s += v;
  Node n;
  n.op = Op::kMeanAll;
  n.a = a;
  n.value = Array::scalar(s / x.size());
  return push(std::move(n));
}

NodeId Tape::reshape(NodeId a, std::vector<int> shape) {
  const Array& x = val(a);
  Array reshaped = Array::from(std::move(shape), x.data);
  Node n;
  n.op = Op::kReshape;
  n.a = a;
  n.value = std::move(reshaped);
  return push(std::move(n));
}

Array& Tape::ensure_grad(NodeId id) {
  Array& g = grads_[static_cast<size_t>(id)];
  if (g.size() == 0) g = Array::zeros(nodes_[static_cast<size_t>(id)].value.shape);
  return g;
}

void Tape::backward(NodeId root, ParamStore* store, bool retain_node_grads) {
  check_id(root);
  if (val(root).size() != 1) {
    throw ContractError("backward: root has shape " +
                        shape_str(val(root).shape) + ", expected a scalar");
  }
  grads_.assign(nodes_.size(), Array{});
  grads_valid_ = true;
  ensure_grad(root)[0] = 1.0;

  for (NodeId id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    Array& g = grads_[static_cast<size_t>(id)];
    if (g.size() == 0) continue;  // root does not depend on this node

    switch (n.op) {
      case Op::kLeaf:
        if (n.param >= 0) {
          if (store == nullptr) {
            throw ContractError("backward: parameter leaf '" +
                                param_names_[static_cast<size_t>(n.param)] +
                                "' but no ParamStore given");
          }
          axpy(1.0, g, store->grad_mut(param_names_[static_cast<size_t>(n.param)]));
        }
        break;

      case Op::kMatMul: {
        // dA += G * B^T, dB += A^T * G.
        gemm_acc(g, false, node(n.b).value, true, ensure_grad(n.a));
        gemm_acc(node(n.a).value, true, g, false, ensure_grad(n.b));
        break;
      }

      case Op::kAddBias: {
        axpy(1.0, g, ensure_grad(n.a));
        Array& gb = ensure_grad(n.b);
        for (int r = 0; r < g.rows(); ++r) {
          for (int j = 0; j < g.cols(); ++j) gb[j] += g.at(r, j);
        }
        break;
      }

      case Op::kAdd:
        axpy(1.0, g, ensure_grad(n.a));
        axpy(1.0, g, ensure_grad(n.b));
        break;

      case Op::kSub:
        axpy(1.0, g, ensure_grad(n.a));
        axpy(-1.0, g, ensure_grad(n.b));
        break;

      case Op::kMul: {
        const Array& x = node(n.a).value;
        const Array& y = node(n.b).value;
        Array& ga = ensure_grad(n.a);
        Array& gb = ensure_grad(n.b);
        for (int i = 0; i < g.size(); ++i) {
          ga[i] += g[i] * y[i];
          gb[i] += g[i] * x[i];
        }
        break;
      }

      case Op::kBcastColMul: {
        const Array& c = node(n.a).value;
        const Array& x = node(n.b).value;
        Array& gc = ensure_grad(n.a);
        Array& gx = ensure_grad(n.b);
        for (int r = 0; r < x.rows(); ++r) {
          double acc = 0.0;
          for (int j = 0; j < x.cols(); ++j) {
            acc += g.at(r, j) * x.at(r, j);
            gx.at(r, j) += g.at(r, j) * c.at(r, 0);
          }
          gc.at(r, 0) += acc;
        }
        break;
      }

      case Op::kScalarMul:
        axpy(n.scalar, g, ensure_grad(n.a));
        break;

      case Op::kRelu: {
        const Array& x = node(n.a).value;
        Array& ga = ensure_grad(n.a);
        for (int i = 0; i < g.size(); ++i) {
          if (x[i] > 0.0) ga[i] += g[i];
        }
        break;
      }

      case Op::kAbs: {
        const Array& x = node(n.a).value;
        Array& ga = ensure_grad(n.a);
        for (int i = 0; i < g.size(); ++i) {
          if (x[i] > 0.0) {
            ga[i] += g[i];
          } else if (x[i] < 0.0) {
            ga[i] -= g[i];
          }
        }
        break;
      }

      case Op::kSigmoid: {
        const Array& y = n.value;
        Array& ga = ensure_grad(n.a);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }

      case Op::kTanh: {
        const Array& y = n.value;
        Array& ga = ensure_grad(n.a);
        for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }

      case Op::kSoftmaxRows: {
        // ds = y ⊙ (g - <g, y>_row).
        const Array& y = n.value;
        Array& ga = ensure_grad(n.a);
        for (int r = 0; r < y.rows(); ++r) {
          double dot = 0.0;
          for (int j = 0; j < y.cols(); ++j) dot += g.at(r, j) * y.at(r, j);
          for (int j = 0; j < y.cols(); ++j) {
            ga.at(r, j) += y.at(r, j) * (g.at(r, j) - dot);
          }
        }
        break;
      }

      case Op::kConcatCols: {
        const int ca = node(n.a).value.cols();
        Array& ga = ensure_grad(n.a);
        Array& gb = ensure_grad(n.b);
        for (int r = 0; r < g.rows(); ++r) {
          for (int j = 0; j < ca; ++j) ga.at(r, j) += g.at(r, j);
          for (int j = 0; j < gb.cols(); ++j) gb.at(r, j) += g.at(r, ca + j);
        }
        break;
      }

      case Op::kSliceCols: {
        Array& ga = ensure_grad(n.a);
        for (int r = 0; r < g.rows(); ++r) {
          for (int j = 0; j < g.cols(); ++j) ga.at(r, n.i0 + j) += g.at(r, j);
        }
        break;
      }

      case Op::kSliceRows: {
        Array& ga = ensure_grad(n.a);
        const int cols = g.cols();
        for (int r = 0; r < g.rows(); ++r) {
          for (int j = 0; j < cols; ++j) ga.at(n.i0 + r, j) += g.at(r, j);
        }
        break;
      }

      case Op::kStackRows: {
        int off = 0;
        for (NodeId p : n.parts) {
          Array& gp = ensure_grad(p);
          for (int i = 0; i < gp.size(); ++i) {
            gp[i] += g[static_cast<size_t>(off) + i];
          }
          off += gp.size();
        }
        break;
      }

      case Op::kRowDotGroup: {
        const Array& k = node(n.a).value;
        const Array& q = node(n.b).value;
        Array& gk = ensure_grad(n.a);
        Array& gq = ensure_grad(n.b);
        const int group = n.i0;
        const int d = q.cols();
        for (int r = 0; r < q.rows(); ++r) {
          const double* qr = q.data.data() + static_cast<size_t>(r) * d;
          double* gqr = gq.data.data() + static_cast<size_t>(r) * d;
          for (int gg = 0; gg < group; ++gg) {
            const double go = g.at(r, gg);
            const size_t krow = (static_cast<size_t>(r) * group + gg) * d;
            const double* kr = k.data.data() + krow;
            double* gkr = gk.data.data() + krow;
            for (int j = 0; j < d; ++j) {
              gkr[j] += go * qr[j];
              gqr[j] += go * kr[j];
            }
          }
        }
        break;
      }

      case Op::kGatherCols: {
        Array& ga = ensure_grad(n.a);
        for (int r = 0; r < g.rows(); ++r) {
          ga.at(r, n.index[static_cast<size_t>(r)]) += g.at(r, 0);
        }
        break;
      }

      case Op::kSumRows: {
        Array& ga = ensure_grad(n.a);
        for (int r = 0; r < ga.rows(); ++r) {
          const double gr = g.at(r, 0);
          for (int j = 0; j < ga.cols(); ++j) ga.at(r, j) += gr;
        }
        break;
      }

      case Op::kSumAll: {
        Array& ga = ensure_grad(n.a);
        const double gs = g[0];
        for (double& v : ga.data) v += gs;
        break;
      }

      case Op::kMeanAll: {
        Array& ga = ensure_grad(n.a);
        const double gs = g[0] / ga.size();
        for (double& v : ga.data) v += gs;
        break;
      }

      case Op::kReshape: {
        Array& ga = ensure_grad(n.a);
        axpy(1.0, g, ga);
        break;
      }
    }

    if (!retain_node_grads && id != root) {
      g = Array{};  // release as soon as this node's contribution is pushed
    }
  }
  if (!retain_node_grads) grads_valid_ = false;
}

Array Tape::grad_of(NodeId id) const {
  check_id(id);
  if (!grads_valid_) {
    throw ContractError(
        "grad_of: call backward(..., retain_node_grads=true) first");
  }
  const Array& g = grads_[static_cast<size_t>(id)];
  if (g.size() == 0) return Array::zeros(node(id).value.shape);
  return g;
}

}  // namespace qattenlab
