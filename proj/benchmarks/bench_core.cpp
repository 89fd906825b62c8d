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

#include <benchmark/benchmark.h>

#include "qattenlab/agent_net.hpp"
#include "qattenlab/env.hpp"
#include "qattenlab/mixers.hpp"
#include "qattenlab/rng.hpp"
#include "qattenlab/skirmish.hpp"
#include "qattenlab/tape.hpp"
#include "qattenlab/trainer.hpp"

namespace {

using namespace qattenlab;

Array random_array(int rows, int cols, Rng& rng) {
  Array a = Array::zeros({rows, cols});
  for (double& v : a.data) v = rng.uniform(-1.0, 1.0);
  return a;
}

void BM_Matmul(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(1);
  const Array a = random_array(n, 64, rng);
  const Array b = random_array(64, 64, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(512)->Arg(4096);

void BM_AgentForwardBackward(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  AgentNetConfig cfg;
  cfg.obs_dim = 30;
  cfg.n_agents = 3;
  cfg.n_actions = 9;
  AgentNet net(cfg);
  ParamStore store;
  Rng rng(1);
  net.register_params(store, rng);
  const Array x = random_array(rows, net.input_dim(), rng);
  const Array h = random_array(rows, cfg.hidden, rng);
  for (auto _ : state) {
    Tape t;
    const AgentNet::ForwardOut out =
        net.forward(t, store, t.constant(x), t.constant(h));
    NodeId loss = t.mean_all(out.q);
    t.backward(loss, &store);
    store.zero_grads();
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_AgentForwardBackward)->Arg(96)->Arg(960);

void BM_AttentionMix(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  const int n = 3;
  const int state_dim = 21;
  const int feat_dim = 30;
  auto mixer = make_mixer("attention", n, state_dim, feat_dim);
  ParamStore store;
  Rng rng(1);
  mixer->register_params(store, rng);
  const Array q = random_array(rows, n, rng);
  const Array s = random_array(rows, state_dim, rng);
  const Array f = random_array(rows * n, feat_dim, rng);
  for (auto _ : state) {
    Tape t;
    NodeId tot = mixer->mix(t, store, t.constant(q), t.constant(s), t.constant(f));
    NodeId loss = t.mean_all(tot);
    t.backward(loss, &store);
    store.zero_grads();
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_AttentionMix)->Arg(96)->Arg(960);

void BM_SkirmishEpisode(benchmark::State& state) {
  SkirmishConfig cfg;
  SkirmishEnv env(cfg);
  Rng rng(7);
  uint64_t seed = 0;
  for (auto _ : state) {
    env.reset(seed++);
    long long steps = 0;
    bool done = false;
    while (!done) {
      std::vector<int> actions(static_cast<size_t>(env.info().n_agents));
      for (size_t i = 0; i < actions.size(); ++i) {
        const std::vector<uint8_t> mask = env.action_mask(static_cast<int>(i));
        int a = rng.uniform_int(static_cast<int>(mask.size()));
        while (!mask[static_cast<size_t>(a)]) {
          a = rng.uniform_int(static_cast<int>(mask.size()));
        }
        actions[i] = a;
      }
      done = env.step(actions).terminal;
      ++steps;
    }
    benchmark::DoNotOptimize(steps);
  }
}
BENCHMARK(BM_SkirmishEpisode);

}  // namespace

BENCHMARK_MAIN();
