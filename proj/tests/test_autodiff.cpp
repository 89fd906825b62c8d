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

#include <cmath>
#include <set>

#include <doctest.h>

#include "qattenlab/array.hpp"
#include "qattenlab/error.hpp"
#include "qattenlab/grad_check.hpp"
#include "qattenlab/optimizer.hpp"
#include "qattenlab/param_store.hpp"
#include "qattenlab/rng.hpp"
#include "qattenlab/tape.hpp"
#include "test_helpers.hpp"

using namespace qattenlab;
using qattenlab::testing::random_array;

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("array construction and matrix views") {
  Array a = Array::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 3);
  CHECK(a.at(1, 2) == 6.0);

  Array row = Array::row({7, 8});
  CHECK(row.rows() == 1);
  CHECK(row.cols() == 2);

  Array flat = Array::from({4}, {1, 2, 3, 4});
  CHECK(flat.rows() == 1);  // rank-1 reads as a single row
  CHECK(flat.cols() == 4);

  CHECK_THROWS_AS(Array::from({2, 2}, {1, 2, 3}), ShapeError);
}

TEST_CASE("matmul against a hand-multiplied matrix") {
  Array a = Array::from({2, 2}, {1, 2, 3, 4});
  Array b = Array::from({2, 2}, {5, 6, 7, 8});
  Array c = matmul(a, b);
  CHECK(c.at(0, 0) == doctest::Approx(19).epsilon(1e-14));
  CHECK(c.at(0, 1) == doctest::Approx(22).epsilon(1e-14));
  CHECK(c.at(1, 0) == doctest::Approx(43).epsilon(1e-14));
  CHECK(c.at(1, 1) == doctest::Approx(50).epsilon(1e-14));

  Array bad = Array::from({3, 2}, {0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(matmul(a, bad), ShapeError);
}

TEST_CASE("gemm transposes match explicit transposition") {
  Rng rng(7);
  Array a = random_array({3, 4}, rng);
  Array b = random_array({3, 5}, rng);
  // a^T (4,3) * b (3,5)
  Array at = Array::zeros({4, 3});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) at.at(c, r) = a.at(r, c);
  Array expect = matmul(at, b);
  Array got = gemm(a, true, b, false);
  CHECK(qattenlab::testing::max_abs_diff(expect, got) < 1e-14);
}

TEST_CASE("tape forward values: elementwise and structural ops") {
  Tape t;
  NodeId x = t.constant(Array::from({2, 2}, {1, -2, 0, 3}));

  CHECK(t.val(t.relu(x)).data == std::vector<double>{1, 0, 0, 3});
  CHECK(t.val(t.abs(x)).data == std::vector<double>{1, 2, 0, 3});
  CHECK(t.val(t.scalar_mul(2.0, x)).data == std::vector<double>{2, -4, 0, 6});

  NodeId bias = t.constant(Array::row({10, 20}));
  const Array& ab = t.val(t.add_bias(x, bias));
  CHECK(ab.data == std::vector<double>{11, 18, 10, 23});

  NodeId col = t.constant(Array::from({2, 1}, {2, -1}));
  const Array& bc = t.val(t.bcast_col_mul(col, x));
  CHECK(bc.data == std::vector<double>{2, -4, 0, -3});

  const Array& sr = t.val(t.sum_rows(x));
  CHECK(sr.shape == std::vector<int>{2, 1});
  CHECK(sr.data == std::vector<double>{-1, 3});
  CHECK(t.val(t.sum_all(x))[0] == doctest::Approx(2.0));
  CHECK(t.val(t.mean_all(x))[0] == doctest::Approx(0.5));
}

TEST_CASE("softmax rows are probability vectors and match closed form") {
  Tape t;
  NodeId x = t.constant(Array::from({1, 2}, {0.0, std::log(2.0)}));
  const Array& s = t.val(t.softmax_rows(x));
  CHECK(s[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Max subtraction keeps large logits finite.
  Tape t2;
  NodeId big = t2.constant(Array::from({1, 2}, {1000.0, 1000.0}));
  const Array& s2 = t2.val(t2.softmax_rows(big));
  CHECK(s2[0] == doctest::Approx(0.5));
  CHECK(s2[1] == doctest::Approx(0.5));
}

TEST_CASE("row_dot_group pairs each query row with its key group") {
  Tape t;
  // Two rows, group of two: keys row 2r+g belongs to (row r, slot g).
  NodeId keys = t.constant(Array::from({4, 2}, {1, 0, 0, 1, 2, 0, 0, 2}));
  NodeId query = t.constant(Array::from({2, 2}, {3, 4, 5, 6}));
  const Array& out = t.val(t.row_dot_group(keys, query, 2));
  CHECK(out.shape == std::vector<int>{2, 2});
  CHECK(out.at(0, 0) == doctest::Approx(3));
  CHECK(out.at(0, 1) == doctest::Approx(4));
  CHECK(out.at(1, 0) == doctest::Approx(10));
  CHECK(out.at(1, 1) == doctest::Approx(12));
}

TEST_CASE("gather_cols picks one entry per row and validates indices") {
  Tape t;
  NodeId x = t.constant(Array::from({2, 3}, {1, 2, 3, 4, 5, 6}));
  const Array& g = t.val(t.gather_cols(x, {2, 0}));
  CHECK(g.shape == std::vector<int>{2, 1});
  CHECK(g.data == std::vector<double>{3, 4});

  CHECK_THROWS_AS(t.gather_cols(x, {0}), ShapeError);        // wrong count
  CHECK_THROWS_AS(t.gather_cols(x, {0, 3}), ContractError);  // out of range
}

TEST_CASE("slices, stacks, concats, reshape") {
  Tape t;
  NodeId x = t.constant(Array::from({2, 3}, {1, 2, 3, 4, 5, 6}));
  CHECK(t.val(t.slice_cols(x, 1, 3)).data == std::vector<double>{2, 3, 5, 6});
  CHECK(t.val(t.slice_rows(x, 1, 2)).data == std::vector<double>{4, 5, 6});
  CHECK_THROWS_AS(t.slice_cols(x, 2, 1), ShapeError);
  CHECK_THROWS_AS(t.slice_rows(x, 0, 3), ShapeError);

  NodeId y = t.constant(Array::from({2, 1}, {7, 8}));
  CHECK(t.val(t.concat_cols(x, y)).data ==
        std::vector<double>{1, 2, 3, 7, 4, 5, 6, 8});

  NodeId s = t.stack_rows({t.slice_rows(x, 1, 2), t.slice_rows(x, 0, 1)});
  CHECK(t.val(s).data == std::vector<double>{4, 5, 6, 1, 2, 3});
  CHECK_THROWS_AS(t.stack_rows({}), ContractError);

  const Array& r = t.val(t.reshape(x, {3, 2}));
  CHECK(r.shape == std::vector<int>{3, 2});
  CHECK(r.data == t.val(x).data);
  CHECK_THROWS_AS(t.reshape(x, {4, 2}), ShapeError);
}

TEST_CASE("a zero-row stack part contributes nothing") {
  Tape t;
  NodeId x = t.constant(Array::from({2, 2}, {1, 2, 3, 4}));
  NodeId empty = t.slice_rows(x, 1, 1);
  CHECK(t.val(empty).rows() == 0);
  NodeId s = t.stack_rows({empty, x});
  CHECK(t.val(s).data == t.val(x).data);
}

TEST_CASE("backward demands a scalar root and a store for parameters") {
  ParamStore store;
  Rng rng(3);
  store.add("w", random_array({2, 2}, rng));
  Tape t;
  NodeId w = t.param(store, "w");
  CHECK_THROWS_AS(t.backward(w, &store), ContractError);

  NodeId loss = t.sum_all(w);
  CHECK_THROWS_AS(t.backward(loss, nullptr), ContractError);
}

TEST_CASE("parameters reused on one tape accumulate both contributions") {
  ParamStore store;
  store.add("w", Array::from({1, 2}, {1.0, 2.0}));
  Tape t;
  NodeId w1 = t.param(store, "w");
  NodeId w2 = t.param(store, "w");
  CHECK(w1 == w2);  // same leaf, not a copy
  // loss = sum(w) + sum(w * w) => dloss/dw = 1 + 2w.
  NodeId loss = t.add(t.sum_all(w1), t.sum_all(t.mul(w1, w2)));
  store.zero_grads();
  t.backward(loss, &store);
  CHECK(store.grad("w")[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(store.grad("w")[1] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("grad_of after retaining: chain through a product") {
  Tape t;
  NodeId a = t.constant(Array::from({1, 2}, {3.0, 4.0}));
  NodeId b = t.constant(Array::from({1, 2}, {5.0, 6.0}));
  NodeId loss = t.sum_all(t.mul(a, b));
  t.backward(loss, nullptr, /*retain_node_grads=*/true);
  CHECK(t.grad_of(a).data == std::vector<double>{5.0, 6.0});
  CHECK(t.grad_of(b).data == std::vector<double>{3.0, 4.0});

  Tape t2;
  NodeId c = t2.constant(Array::scalar(1.0));
  t2.backward(c, nullptr);  // not retained
  CHECK_THROWS_AS(t2.grad_of(c), ContractError);
}

namespace {

// One composite graph that routes through every differentiable op. The
// output is contracted against a fixed random weighting and scaled down so
// the finite-difference noise floor sits far below the comparison floor.
double composite_objective(Tape& t, const ParamStore& store, const Array& x,
                           const Array& contract) {
  NodeId xn = t.constant(x);
  NodeId a = t.add_bias(t.matmul(xn, t.param(store, "w1")),
                        t.param(store, "b1"));
  NodeId h = t.relu(a);                                    // (3, 5)
  NodeId s = t.sigmoid(t.slice_cols(h, 0, 2));             // (3, 2)
  NodeId tn = t.tanh(t.slice_cols(h, 2, 4));               // (3, 2)
  NodeId m = t.mul(s, tn);                                 // (3, 2)
  NodeId c = t.concat_cols(m, t.abs(t.slice_cols(h, 4, 5)));  // (3, 3)
  NodeId sm = t.softmax_rows(c);                           // (3, 3)
  NodeId picked = t.gather_cols(sm, {0, 2, 1});            // (3, 1)
  NodeId scaled = t.bcast_col_mul(picked, m);              // (3, 2)
  NodeId st = t.stack_rows({scaled, t.scalar_mul(0.5, m)});  // (6, 2)
  NodeId y = t.matmul(t.reshape(st, {3, 4}), t.param(store, "w2"));  // (3, 2)
  NodeId logits = t.row_dot_group(st, y, 2);               // (3, 2)
  NodeId obj = t.sum_all(t.mul(logits, t.constant(contract)));
  obj = t.add(obj, t.mean_all(y));
  obj = t.sub(obj, t.scalar_mul(0.25, t.sum_all(t.sum_rows(t.slice_rows(st, 1, 5)))));
  return t.val(t.scalar_mul(1e-3, obj))[0];
}

}  // namespace

TEST_CASE("analytic gradients of a composite graph match finite differences") {
  Rng rng(2026);
  for (int draw = 0; draw < 5; ++draw) {
    ParamStore store;
    store.add("w1", random_array({4, 5}, rng));
    store.add("b1", random_array({1, 5}, rng));
    store.add("w2", random_array({4, 2}, rng));
    const Array x = random_array({3, 4}, rng);
    const Array contract = random_array({3, 2}, rng);

    auto f = [&](const ParamStore& s) {
      Tape t;
      return composite_objective(t, s, x, contract);
    };
    auto analytic = [&](ParamStore& s) {
      Tape t;
      NodeId xn = t.constant(x);
      NodeId a = t.add_bias(t.matmul(xn, t.param(s, "w1")), t.param(s, "b1"));
      NodeId h = t.relu(a);
      NodeId sd = t.sigmoid(t.slice_cols(h, 0, 2));
      NodeId tn = t.tanh(t.slice_cols(h, 2, 4));
      NodeId m = t.mul(sd, tn);
      NodeId c = t.concat_cols(m, t.abs(t.slice_cols(h, 4, 5)));
      NodeId sm = t.softmax_rows(c);
      NodeId picked = t.gather_cols(sm, {0, 2, 1});
      NodeId scaled = t.bcast_col_mul(picked, m);
      NodeId st = t.stack_rows({scaled, t.scalar_mul(0.5, m)});
      NodeId y = t.matmul(t.reshape(st, {3, 4}), t.param(s, "w2"));
      NodeId logits = t.row_dot_group(st, y, 2);
      NodeId obj = t.sum_all(t.mul(logits, t.constant(contract)));
      obj = t.add(obj, t.mean_all(y));
      obj = t.sub(obj,
                  t.scalar_mul(0.25, t.sum_all(t.sum_rows(t.slice_rows(st, 1, 5)))));
      t.backward(t.scalar_mul(1e-3, obj), &s);
    };

    store.zero_grads();
    GradCheckReport report = grad_check(f, analytic, store, 1e-6, 1e-4);
    INFO("draw ", draw, " worst param ", report.worst_param, "[",
         report.worst_index, "] analytic ", report.analytic_at_worst,
         " numeric ", report.numeric_at_worst);
    CHECK(report.pass);
    CHECK(report.max_rel_err < 1e-4);
    CHECK(report.elements_checked == 4 * 5 + 5 + 4 * 2);
  }
}

TEST_CASE("grad_check flags a deliberately corrupted gradient") {
  ParamStore store;
  store.add("w", Array::from({1, 2}, {0.3, -0.7}));
  auto f = [](const ParamStore& s) {
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) acc += s.value("w")[i] * s.value("w")[i];
    return acc;
  };
  auto analytic = [](ParamStore& s) {
    for (int i = 0; i < 2; ++i) {
      s.grad_mut("w")[i] = 2.0 * s.value("w")[i] * 1.01;  // one percent off
    }
  };
  GradCheckReport report = grad_check(f, analytic, store, 1e-6, 1e-4);
  CHECK_FALSE(report.pass);
  CHECK(report.worst_param == "w");
}

TEST_CASE("param store: registration, iteration order, copy") {
  ParamStore store;
  Rng rng(5);
  store.add("b.x", Array::row({1}));
  store.add("a.y", Array::row({2}));
  CHECK_THROWS_AS(store.add("a.y", Array::row({3})), ContractError);
  CHECK(store.names() == std::vector<std::string>{"a.y", "b.x"});
  CHECK(store.total_elements() == 2);

  ParamStore other;
  other.add("a.y", Array::row({0}));
  other.add("b.x", Array::row({0}));
  other.copy_values_from(store);
  CHECK(other.value("a.y")[0] == 2.0);

  ParamStore mismatched;
  mismatched.add("a.y", Array::row({0}));
  CHECK_THROWS_AS(mismatched.copy_values_from(store), ContractError);
}

TEST_CASE("gradient clipping rescales only past the ceiling") {
  ParamStore store;
  store.add("w", Array::row({0.0, 0.0}));
  store.grad_mut("w")[0] = 3.0;
  store.grad_mut("w")[1] = 4.0;
  CHECK(store.grad_global_norm() == doctest::Approx(5.0));

  store.clip_grads(10.0);  // under the ceiling: untouched
  CHECK(store.grad("w")[0] == doctest::Approx(3.0));

  store.clip_grads(2.5);  // norm 5 -> rescale by 0.5
  CHECK(store.grad("w")[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(store.grad("w")[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(store.grad_global_norm() == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("rmsprop follows the accumulator recurrence exactly") {
  RmsPropConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.smoothing = 0.9;
  cfg.epsilon = 1e-5;
  RmsProp opt(cfg);

  ParamStore store;
  store.add("w", Array::row({1.0}));
  store.grad_mut("w")[0] = 2.0;
  opt.step(store);
  // v = 0.9*0 + 0.1*4 = 0.4; w = 1 - 0.1 * 2 / (sqrt(0.4) + 1e-5)
  double v = 0.4;
  double w = 1.0 - 0.1 * 2.0 / (std::sqrt(v) + 1e-5);
  CHECK(store.value("w")[0] == doctest::Approx(w).epsilon(1e-14));
  CHECK(opt.second_moments().at("w")[0] == doctest::Approx(v).epsilon(1e-14));

  store.grad_mut("w")[0] = -1.0;
  opt.step(store);
  v = 0.9 * v + 0.1 * 1.0;
  w = w + 0.1 * 1.0 / (std::sqrt(v) + 1e-5);
  CHECK(store.value("w")[0] == doctest::Approx(w).epsilon(1e-14));
}

TEST_CASE("optimizer accumulators can be restored verbatim") {
  RmsProp opt;
  opt.set_second_moment("w", Array::row({0.25}));
  ParamStore store;
  store.add("w", Array::row({1.0}));
  store.grad_mut("w")[0] = 1.0;
  opt.step(store);
  // v = 0.99*0.25 + 0.01*1
  CHECK(opt.second_moments().at("w")[0] ==
        doctest::Approx(0.99 * 0.25 + 0.01).epsilon(1e-14));
}

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));

  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.u01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const int k = c.uniform_int(5);
    CHECK(k >= 0);
    CHECK(k < 5);
  }

  Rng d(9);
  d.next_u64();
  const std::string state = d.save_state();
  const uint64_t expect = d.next_u64();
  Rng e(0);
  e.load_state(state);
  CHECK(e.next_u64() == expect);
}

TEST_CASE("init_weight stays inside the fan-in bound") {
  Rng rng(11);
  Array w = init_weight(rng, 16, 8);
  CHECK(w.shape == std::vector<int>{16, 8});
  const double bound = 1.0 / std::sqrt(16.0);
  for (int i = 0; i < w.size(); ++i) {
    CHECK(std::abs(w[i]) <= bound);
  }
  // Not all identical (the draw actually happened).
  std::set<double> distinct(w.data.begin(), w.data.end());
  CHECK(distinct.size() > 100);
}

TEST_SUITE_END();
