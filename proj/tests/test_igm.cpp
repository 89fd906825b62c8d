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

#include <memory>
#include <vector>

#include <doctest.h>

#include "qattenlab/env.hpp"
#include "qattenlab/error.hpp"
#include "qattenlab/igm.hpp"
#include "test_helpers.hpp"

using namespace qattenlab;
using qattenlab::testing::game_file;
using qattenlab::testing::random_array;

namespace {

IgmCase random_case(Rng& rng, int n_agents, int n_actions, int state_dim,
                    int feat_dim) {
  IgmCase c;
  c.state = random_array({1, state_dim}, rng);
  c.agent_feats = random_array({n_agents, feat_dim}, rng);
  c.utilities = random_array({n_agents, n_actions}, rng);
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("igm");

TEST_CASE("additive mixing is always greedy-consistent") {
  ParamStore store;
  SumMixer mixer(3);
  Rng rng(9);
  for (int draw = 0; draw < 25; ++draw) {
    IgmCase c = random_case(rng, 3, 4, 2, 3);
    IgmResult r = check_igm(mixer, store, c);
    CHECK(r.consistent);
    // For a sum the best joint value is the sum of per-agent maxima.
    double expect = 0.0;
    for (int i = 0; i < 3; ++i) {
      double m = c.utilities.at(i, 0);
      for (int a = 1; a < 4; ++a) m = std::max(m, c.utilities.at(i, a));
      expect += m;
    }
    CHECK(r.best_value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(r.greedy_value == doctest::Approx(r.best_value).epsilon(1e-12));
    CHECK(r.greedy_actions == r.best_actions);
  }
}

TEST_CASE("attention and hypernet mixers pass on random draws") {
  for (const char* kind : {"attention", "attention_weighted", "hypernet"}) {
    CAPTURE(kind);
    auto mixer = make_mixer(kind, 3, 2, 3);
    ParamStore store;
    Rng init(11);
    mixer->register_params(store, init);
    Rng rng(13);
    for (int draw = 0; draw < 25; ++draw) {
      IgmCase c = random_case(rng, 3, 4, 2, 3);
      IgmResult r = check_igm(*mixer, store, c);
      CHECK(r.consistent);
      CHECK(r.greedy_value >= r.best_value - 1e-9);
    }
  }
}

TEST_CASE("a negative agent weight breaks greedy consistency") {
  // Agent 1's utility is weighted by -1, so its greedy (larger) choice
  // lowers the joint value while the exhaustive maximum prefers the smaller.
  FixedLinearMixer mixer(Array::row({1.0, -1.0}), 0.0);
  ParamStore store;
  IgmCase c;
  c.state = Array::zeros({1, 1});
  c.agent_feats = Array::zeros({2, 1});
  c.utilities = Array::from({2, 2}, {0.0, 1.0,
                                     0.0, 1.0});
  IgmResult r = check_igm(mixer, store, c);
  CHECK_FALSE(r.consistent);
  CHECK(r.greedy_actions == std::vector<int>{1, 1});
  CHECK(r.greedy_value == doctest::Approx(0.0));
  CHECK(r.best_actions == std::vector<int>{1, 0});
  CHECK(r.best_value == doctest::Approx(1.0));
}

TEST_CASE("masks restrict both the greedy choice and the enumeration") {
  ParamStore store;
  SumMixer mixer(2);
  IgmCase c;
  c.state = Array::zeros({1, 1});
  c.agent_feats = Array::zeros({2, 1});
  c.utilities = Array::from({2, 3}, {5.0, 1.0, 0.0,
                                     0.0, 1.0, 9.0});
  c.masks = {0, 1, 1,   // agent 0 cannot take its favourite action
             1, 1, 0};  // agent 1 cannot take its favourite action
  IgmResult r = check_igm(mixer, store, c);
  CHECK(r.consistent);
  CHECK(r.greedy_actions == std::vector<int>{1, 1});
  CHECK(r.best_value == doctest::Approx(2.0));

  c.masks.assign(6, 0);
  CHECK_THROWS_AS(check_igm(mixer, store, c), ContractError);

  c.masks = {1, 1};  // wrong size
  CHECK_THROWS_AS(check_igm(mixer, store, c), ShapeError);
}

TEST_CASE("joint spaces beyond the cap are refused") {
  ParamStore store;
  SumMixer mixer(7);
  Rng rng(3);
  IgmCase c = random_case(rng, 7, 6, 1, 1);  // 6^7 = 279936 > 100000
  CHECK_THROWS_AS(check_igm(mixer, store, c), CapacityError);
}

TEST_CASE("collected cases carry the environment's shapes") {
  auto env = load_env(game_file("two_step.json"));
  AgentNetConfig cfg;
  cfg.obs_dim = env->info().obs_dim;
  cfg.n_agents = env->info().n_agents;
  cfg.n_actions = env->info().n_actions;
  cfg.hidden = 8;
  AgentNet net(cfg);
  ParamStore store;
  Rng rng(21);
  net.register_params(store, rng);

  const std::vector<IgmCase> cases = collect_igm_cases(net, store, *env, 7, 99);
  REQUIRE(cases.size() == 7);
  for (const IgmCase& c : cases) {
    CHECK(c.state.rows() == 1);
    CHECK(c.state.cols() == 5);
    CHECK(c.agent_feats.rows() == 2);
    CHECK(c.agent_feats.cols() == 3);
    CHECK(c.utilities.rows() == 2);
    CHECK(c.utilities.cols() == 2);
    CHECK(c.masks.size() == 4);
  }
  // Deterministic in the seed.
  const std::vector<IgmCase> again = collect_igm_cases(net, store, *env, 7, 99);
  for (size_t i = 0; i < cases.size(); ++i) {
    CHECK(qattenlab::testing::max_abs_diff(cases[i].utilities,
                                           again[i].utilities) == 0.0);
    CHECK(qattenlab::testing::max_abs_diff(cases[i].state, again[i].state) ==
          0.0);
  }
}

TEST_SUITE_END();
