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

#ifndef QATTENLAB_TAPE_HPP_
#define QATTENLAB_TAPE_HPP_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "qattenlab/array.hpp"
#include "qattenlab/param_store.hpp"

namespace qattenlab {

using NodeId = int32_t;

// Reverse-mode automatic differentiation over a linear tape of matrix
// operations. A tape records one forward computation; backward() then walks
// it once in reverse, pushing vector-Jacobian products into the inputs of
// each node and accumulating parameter gradients into a ParamStore.
//
// Usage pattern: build the graph with the factory methods (every method
// validates shapes eagerly and throws ShapeError on a mismatch), read
// intermediate values with val(), call backward() on a scalar node, then
// discard the tape. Tapes are cheap to construct; one is built per training
// step.
//
// Node ids are indices into the tape, so an input of a node always has a
// smaller id than the node itself. Backward exploits this: a single reverse
// scan over ids is a reverse-topological traversal.
class Tape {
 public:
  // A constant input: gradients flow to it (retrievable with grad_of when
  // retained) but are not pushed into any parameter store.
  NodeId constant(Array value);

  // A parameter leaf. The value is copied out of the store; during
  // backward(), the accumulated gradient is added into store.grad(name).
  // Calling param() twice with the same name on one tape returns the same
  // node, so parameters shared across timesteps or modules accumulate
  // gradients from every use.
  NodeId param(const ParamStore& store, const std::string& name);

  // out = a * b for matrix views (m,k)x(k,n).
  NodeId matmul(NodeId a, NodeId b);
  // out[r,c] = a[r,c] + bias[0,c]; bias is a (1,n) row broadcast over rows.
  NodeId add_bias(NodeId a, NodeId bias);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  // Elementwise product; same shape required.
  NodeId mul(NodeId a, NodeId b);
  // out[r,c] = col[r,0] * mat[r,c]; col is an (m,1) column broadcast over
  // columns. Used for per-row scaling (mixing weights, hypernetwork rows).
  NodeId bcast_col_mul(NodeId col, NodeId mat);
  NodeId scalar_mul(double c, NodeId a);

  NodeId relu(NodeId a);
  // Elementwise |x|; subgradient 0 at x == 0.
  NodeId abs(NodeId a);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  // Softmax along each row (max-subtracted for stability). Rows of the
  // result are probability vectors: non-negative, summing to one.
  NodeId softmax_rows(NodeId a);

  // Horizontal concatenation: (m,na) ++ (m,nb) -> (m, na+nb).
  NodeId concat_cols(NodeId a, NodeId b);
  // Columns [c0, c1) of a.
  NodeId slice_cols(NodeId a, int c0, int c1);
  // Rows [r0, r1) of a.
  NodeId slice_rows(NodeId a, int r0, int r1);
  // Vertical concatenation of parts, in order. All parts share a column
  // count; any part may have zero rows.
  NodeId stack_rows(const std::vector<NodeId>& parts);

  // Grouped row-wise dot products, the attention-logit kernel:
  //   keys  (m*group, d), query (m, d)  ->  out (m, group)
  //   out[r, g] = dot(keys[r*group + g, :], query[r, :]).
  NodeId row_dot_group(NodeId keys, NodeId query, int group);

  // Per-row column selection: out (m,1), out[r,0] = a[r, index[r]].
  // index.size() must equal the row count; entries must lie in [0, cols).
  NodeId gather_cols(NodeId a, std::vector<int> index);

  // Row reductions: (m,n) -> (m,1), and full reductions to a (1,1) scalar.
  NodeId sum_rows(NodeId a);
  NodeId sum_all(NodeId a);
  NodeId mean_all(NodeId a);

  // Reinterprets the buffer with a new shape of equal volume.
  NodeId reshape(NodeId a, std::vector<int> shape);

  const Array& val(NodeId id) const;
  size_t node_count() const { return nodes_.size(); }

  // Reverse pass from a scalar root (shape (1,1) or {1}); throws
  // ContractError otherwise. Parameter-leaf gradients are accumulated into
  // *store (which must then be non-null; zero it first if starting a fresh
  // step). With retain_node_grads, per-node gradients stay readable through
  // grad_of(); otherwise each node's gradient buffer is released as soon as
  // the node has been processed, which keeps peak memory near the forward
  // pass's own footprint.
  void backward(NodeId root, ParamStore* store, bool retain_node_grads = false);

  // Gradient of the last backward() root with respect to node id. Only
  // available after backward(..., retain_node_grads=true); nodes the root
  // does not depend on have a zero gradient.
  Array grad_of(NodeId id) const;

 private:
  enum class Op : uint8_t {
    kLeaf, kMatMul, kAddBias, kAdd, kSub, kMul, kBcastColMul, kScalarMul,
    kRelu, kAbs, kSigmoid, kTanh, kSoftmaxRows, kConcatCols, kSliceCols,
    kSliceRows, kStackRows, kRowDotGroup, kGatherCols, kSumRows, kSumAll,
    kMeanAll, kReshape,
  };

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    int i0 = 0;                   // slice start / group size
    int i1 = 0;                   // slice end
    double scalar = 0.0;          // kScalarMul factor
    std::vector<NodeId> parts;    // kStackRows inputs
    std::vector<int> index;       // kGatherCols selection
    int param = -1;               // index into param_names_, or -1
    Array value;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;
  void check_id(NodeId id) const;
  Array& ensure_grad(NodeId id);

  std::vector<Node> nodes_;
  std::vector<Array> grads_;
  std::vector<std::string> param_names_;
  std::unordered_map<std::string, NodeId> param_leaves_;
  bool grads_valid_ = false;
};

}  // namespace qattenlab

#endif  // QATTENLAB_TAPE_HPP_
