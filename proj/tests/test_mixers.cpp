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
#include <memory>

#include <doctest.h>

#include "qattenlab/error.hpp"
#include "qattenlab/mixers.hpp"
#include "test_helpers.hpp"

using namespace qattenlab;
using qattenlab::testing::random_array;

namespace {

constexpr int kAgents = 3;
constexpr int kState = 6;
constexpr int kFeat = 5;

struct Fixture {
  std::unique_ptr<Mixer> mixer;
  ParamStore store;

  explicit Fixture(const std::string& kind, uint64_t seed = 17) {
    mixer = make_mixer(kind, kAgents, kState, kFeat);
    Rng rng(seed);
    mixer->register_params(store, rng);
  }
};

double single_mix(const Mixer& mixer, const ParamStore& store,
                  const Array& state, const Array& feats, const Array& q) {
  Tape t;
  NodeId out = mixer.mix(t, store, t.constant(q), t.constant(state),
                         t.constant(feats));
  return t.val(out)[0];
}

}  // namespace

TEST_SUITE_BEGIN("mixers");

TEST_CASE("make_mixer dispatches on the kind name") {
  CHECK(make_mixer("attention", 2, 3, 4)->kind() == "attention");
  CHECK(make_mixer("attention_weighted", 2, 3, 4)->kind() == "attention_weighted");
  CHECK(make_mixer("attention_nonlinear", 2, 3, 4)->kind() == "attention_nonlinear");
  CHECK(make_mixer("vdn", 2, 3, 4)->kind() == "vdn");
  CHECK(make_mixer("hypernet", 2, 3, 4)->kind() == "qmix");
  CHECK_THROWS_AS(make_mixer("qtran", 2, 3, 4), ConfigError);
}

TEST_CASE("sum mixer adds utilities and registers nothing") {
  Fixture f("vdn");
  CHECK(f.store.count() == 0);
  Array q = Array::row({1.5, -0.5, 2.0});
  Tape t;
  NodeId out = f.mixer->mix(t, f.store, t.constant(q),
                            t.constant(Array::zeros({1, kState})),
                            t.constant(Array::zeros({0, 0})));
  CHECK(t.val(out)[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_FALSE(f.mixer->inspect(f.store, Array::zeros({1, kState}),
                               Array::zeros({kAgents, kFeat}), q)
                  .has_value());
}

TEST_CASE("fixed linear mixer computes its affine form") {
  FixedLinearMixer mixer(Array::row({1.0, -2.0}), 0.25);
  ParamStore store;
  Tape t;
  NodeId out = mixer.mix(t, store, t.constant(Array::row({3.0, 1.0})),
                         t.constant(Array::zeros({1, 1})),
                         t.constant(Array::zeros({0, 0})));
  CHECK(t.val(out)[0] == doctest::Approx(3.0 - 2.0 + 0.25).epsilon(1e-15));
}

TEST_CASE("attention rows are probability vectors over the agents") {
  for (const char* kind : {"attention", "attention_weighted", "attention_nonlinear"}) {
    Fixture f(kind);
    Rng data(99);
    for (int draw = 0; draw < 50; ++draw) {
      Array state = random_array({1, kState}, data);
      Array feats = random_array({kAgents, kFeat}, data);
      Array q = random_array({1, kAgents}, data);
      auto record = f.mixer->inspect(f.store, state, feats, q);
      REQUIRE(record.has_value());
      CHECK(record->lambda.rows() == 4);  // default head count
      CHECK(record->lambda.cols() == kAgents);
      for (int h = 0; h < record->lambda.rows(); ++h) {
        double sum = 0.0;
        for (int i = 0; i < kAgents; ++i) {
          const double l = record->lambda.at(h, i);
          CHECK(l >= 0.0);
          sum += l;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(record->head_scale.at(0, h) >= 0.0);
      }
    }
  }
}

TEST_CASE("the record's decomposition reassembles the mixed value") {
  for (const char* kind : {"attention", "attention_weighted", "attention_nonlinear"}) {
    Fixture f(kind);
    Rng data(31);
    Array state = random_array({1, kState}, data);
    Array feats = random_array({kAgents, kFeat}, data);
    Array q = random_array({1, kAgents}, data);

    auto record = f.mixer->inspect(f.store, state, feats, q);
    REQUIRE(record.has_value());
    double rebuilt = record->baseline;
    for (int h = 0; h < record->head_scale.cols(); ++h) {
      double attended = 0.0;
      for (int i = 0; i < kAgents; ++i) attended += record->lambda.at(h, i) * q[i];
      CHECK(record->head_q.at(0, h) == doctest::Approx(attended).epsilon(1e-12));
      rebuilt += record->head_scale.at(0, h) * attended;
    }
    CHECK(record->q_tot == doctest::Approx(rebuilt).epsilon(1e-12));
    CHECK(single_mix(*f.mixer, f.store, state, feats, q) ==
          doctest::Approx(record->q_tot).epsilon(1e-9));
  }
}

TEST_CASE("unweighted heads report unit scales") {
  Fixture f("attention");
  Rng data(5);
  auto record = f.mixer->inspect(f.store, random_array({1, kState}, data),
                                 random_array({kAgents, kFeat}, data),
                                 random_array({1, kAgents}, data));
  REQUIRE(record.has_value());
  for (int h = 0; h < record->head_scale.cols(); ++h) {
    CHECK(record->head_scale.at(0, h) == 1.0);
  }
}

TEST_CASE("batched mixing equals one row at a time") {
  for (const char* kind : {"attention", "attention_weighted", "hypernet"}) {
    Fixture f(kind);
    Rng data(41);
    const int rows = 4;
    Array state = random_array({rows, kState}, data);
    Array feats = random_array({rows * kAgents, kFeat}, data);
    Array q = random_array({rows, kAgents}, data);

    Tape t;
    NodeId out = f.mixer->mix(t, f.store, t.constant(q), t.constant(state),
                              t.constant(feats));
    REQUIRE(t.val(out).rows() == rows);

    for (int r = 0; r < rows; ++r) {
      Array s1 = Array::zeros({1, kState});
      for (int c = 0; c < kState; ++c) s1[c] = state.at(r, c);
      Array f1 = Array::zeros({kAgents, kFeat});
      for (int i = 0; i < kAgents; ++i)
        for (int c = 0; c < kFeat; ++c) f1.at(i, c) = feats.at(r * kAgents + i, c);
      Array q1 = Array::zeros({1, kAgents});
      for (int i = 0; i < kAgents; ++i) q1[i] = q.at(r, i);
      CHECK(single_mix(*f.mixer, f.store, s1, f1, q1) ==
            doctest::Approx(t.val(out).at(r, 0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("swapping two agents permutes lambda and preserves the value") {
  Fixture f("attention");
  Rng data(13);
  for (int draw = 0; draw < 20; ++draw) {
    Array state = random_array({1, kState}, data);
    Array feats = random_array({kAgents, kFeat}, data);
    Array q = random_array({1, kAgents}, data);

    // Swap agents 0 and 2 in both the feature rows and the utility row.
    Array feats_p = feats;
    Array q_p = q;
    for (int c = 0; c < kFeat; ++c) {
      std::swap(feats_p.at(0, c), feats_p.at(2, c));
    }
    std::swap(q_p[0], q_p[2]);

    auto rec = f.mixer->inspect(f.store, state, feats, q);
    auto rec_p = f.mixer->inspect(f.store, state, feats_p, q_p);
    REQUIRE(rec.has_value());
    REQUIRE(rec_p.has_value());
    for (int h = 0; h < rec->lambda.rows(); ++h) {
      CHECK(rec_p->lambda.at(h, 0) ==
            doctest::Approx(rec->lambda.at(h, 2)).epsilon(1e-9));
      CHECK(rec_p->lambda.at(h, 2) ==
            doctest::Approx(rec->lambda.at(h, 0)).epsilon(1e-9));
      CHECK(rec_p->lambda.at(h, 1) ==
            doctest::Approx(rec->lambda.at(h, 1)).epsilon(1e-9));
    }
    CHECK(rec_p->q_tot == doctest::Approx(rec->q_tot).epsilon(1e-9));
  }
}

TEST_CASE("probe sensitivities match the record's head-weighted lambdas") {
  for (const char* kind : {"attention", "attention_weighted"}) {
    Fixture f(kind);
    Rng data(23);
    for (int draw = 0; draw < 20; ++draw) {
      Array state = random_array({1, kState}, data);
      Array feats = random_array({kAgents, kFeat}, data);
      Array q = random_array({1, kAgents}, data);
      MixProbe probe = probe_mixer(*f.mixer, f.store, state, feats, q);
      REQUIRE(probe.record.has_value());
      for (int i = 0; i < kAgents; ++i) {
        double expect = 0.0;
        for (int h = 0; h < probe.record->lambda.rows(); ++h) {
          expect += probe.record->head_scale.at(0, h) * probe.record->lambda.at(h, i);
        }
        // The mixed value is exactly linear in the utilities for these
        // variants, so central differences recover the weights sharply.
        CHECK(std::abs(probe.dq[i] - expect) < 1e-6);
        CHECK(probe.dq[i] >= -1e-9);
      }
    }
  }
}

TEST_CASE("hypernet and sum mixers probe non-negative everywhere") {
  Fixture hyper("hypernet");
  Fixture sum("vdn");
  Rng data(29);
  for (int draw = 0; draw < 20; ++draw) {
    Array state = random_array({1, kState}, data);
    Array feats = random_array({kAgents, kFeat}, data);
    Array q = random_array({1, kAgents}, data);

    MixProbe hp = probe_mixer(*hyper.mixer, hyper.store, state, feats, q);
    CHECK_FALSE(hp.record.has_value());
    for (int i = 0; i < kAgents; ++i) CHECK(hp.dq[i] >= -1e-9);

    MixProbe sp = probe_mixer(*sum.mixer, sum.store, state, feats, q);
    for (int i = 0; i < kAgents; ++i) {
      CHECK(sp.dq[i] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("a negative fixed coefficient shows up in the probe") {
  FixedLinearMixer mixer(Array::row({1.0, -1.0, 1.0}), 0.0);
  ParamStore store;
  MixProbe probe = probe_mixer(mixer, store, Array::zeros({1, 2}),
                               Array::zeros({3, 2}), Array::row({0.1, 0.2, 0.3}));
  CHECK(probe.dq[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(probe.dq[1] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("mix validates shapes and finiteness") {
  Fixture f("attention");
  Tape t;
  NodeId q = t.constant(Array::zeros({1, kAgents}));
  NodeId state = t.constant(Array::zeros({1, kState}));
  NodeId bad_feats = t.constant(Array::zeros({kAgents + 1, kFeat}));
  CHECK_THROWS_AS(f.mixer->mix(t, f.store, q, state, bad_feats), ShapeError);

  NodeId bad_state = t.constant(Array::zeros({1, kState + 2}));
  NodeId feats = t.constant(Array::zeros({kAgents, kFeat}));
  CHECK_THROWS_AS(f.mixer->mix(t, f.store, q, bad_state, feats), ShapeError);

  Array naq = Array::zeros({1, kAgents});
  naq[0] = std::nan("");
  NodeId bad_q = t.constant(naq);
  CHECK_THROWS_AS(f.mixer->mix(t, f.store, bad_q, state, feats), NumericError);
}

TEST_CASE("inspect insists on a single state row") {
  Fixture f("attention");
  CHECK_THROWS_AS(f.mixer->inspect(f.store, Array::zeros({2, kState}),
                                   Array::zeros({2 * kAgents, kFeat}),
                                   Array::zeros({2, kAgents})),
                  ContractError);
}

TEST_SUITE_END();
