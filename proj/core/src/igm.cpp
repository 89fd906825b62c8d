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

#include "qattenlab/igm.hpp"

#include <string>

#include "qattenlab/error.hpp"
#include "qattenlab/tape.hpp"

namespace qattenlab {
namespace {

bool allowed(const IgmCase& c, int agent, int action) {
  if (c.masks.empty()) return true;
  const int n_actions = c.utilities.cols();
  return c.masks[static_cast<size_t>(agent) * static_cast<size_t>(n_actions) +
                 static_cast<size_t>(action)] != 0;
}

}  // namespace

IgmResult check_igm(const Mixer& mixer, const ParamStore& store,
                    const IgmCase& icase) {
  const int n = icase.utilities.rows();
  const int n_actions = icase.utilities.cols();
  if (n < 1 || n_actions < 1) {
    throw ContractError("igm check: empty utility table");
  }
  if (!icase.masks.empty() &&
      static_cast<int>(icase.masks.size()) != n * n_actions) {
    throw ShapeError("igm check: mask size does not match the utility table");
  }

  std::vector<std::vector<int>> options(static_cast<size_t>(n));
  long long joint = 1;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < n_actions; ++a) {
      if (allowed(icase, i, a)) options[static_cast<size_t>(i)].push_back(a);
    }
    if (options[static_cast<size_t>(i)].empty()) {
      throw ContractError("igm check: agent " + std::to_string(i) +
                          " has no allowed action");
    }
    joint *= static_cast<long long>(options[static_cast<size_t>(i)].size());
    if (joint > kIgmCapacity) {
      throw CapacityError(
          "igm check: allowed joint-action space exceeds the capacity of " +
          std::to_string(kIgmCapacity) + " combinations");
    }
  }
  const int rows = static_cast<int>(joint);

  // Enumerate every allowed joint action, last agent fastest, each as one
  // row of agent utilities; evaluate the mixer once over the whole block.
  Array agent_q = Array::zeros({rows, n});
  Array states = Array::zeros({rows, icase.state.cols()});
  Array feats = Array::zeros({rows * n, icase.agent_feats.cols()});
  std::vector<int> cursor(static_cast<size_t>(n), 0);
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < n; ++i) {
      const int a = options[static_cast<size_t>(i)][static_cast<size_t>(cursor[static_cast<size_t>(i)])];
      agent_q.at(r, i) = icase.utilities.at(i, a);
      for (int c = 0; c < icase.agent_feats.cols(); ++c) {
        feats.at(r * n + i, c) = icase.agent_feats.at(i, c);
      }
    }
    for (int c = 0; c < icase.state.cols(); ++c) {
      states.at(r, c) = icase.state.at(0, c);
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++cursor[static_cast<size_t>(i)] <
          static_cast<int>(options[static_cast<size_t>(i)].size())) {
        break;
      }
      cursor[static_cast<size_t>(i)] = 0;
    }
  }

  Tape t;
  NodeId tot = mixer.mix(t, store, t.constant(std::move(agent_q)),
                         t.constant(std::move(states)),
                         t.constant(std::move(feats)));
  const Array& values = t.val(tot);

  IgmResult result;
  result.greedy_actions.resize(static_cast<size_t>(n));
  int greedy_row = 0;
  {
    // Per-agent greedy pick and, simultaneously, the row index that joint
    // action occupies in the enumeration above.
    for (int i = 0; i < n; ++i) {
      int best_a = options[static_cast<size_t>(i)][0];
      int best_pos = 0;
      for (int pos = 1; pos < static_cast<int>(options[static_cast<size_t>(i)].size()); ++pos) {
        const int a = options[static_cast<size_t>(i)][static_cast<size_t>(pos)];
        if (icase.utilities.at(i, a) > icase.utilities.at(i, best_a)) {
          best_a = a;
          best_pos = pos;
        }
      }
      result.greedy_actions[static_cast<size_t>(i)] = best_a;
      int span = 1;
      for (int j = i + 1; j < n; ++j) {
        span *= static_cast<int>(options[static_cast<size_t>(j)].size());
      }
      greedy_row += best_pos * span;
    }
  }

  int best_row = 0;
  for (int r = 1; r < rows; ++r) {
    if (values.at(r, 0) > values.at(best_row, 0)) best_row = r;
  }
  result.best_actions.resize(static_cast<size_t>(n));
  {
    int rem = best_row;
    for (int i = n - 1; i >= 0; --i) {
      const int sz = static_cast<int>(options[static_cast<size_t>(i)].size());
      result.best_actions[static_cast<size_t>(i)] =
          options[static_cast<size_t>(i)][static_cast<size_t>(rem % sz)];
      rem /= sz;
    }
  }
  result.greedy_value = values.at(greedy_row, 0);
  result.best_value = values.at(best_row, 0);
  result.consistent = result.greedy_value >= result.best_value - 1e-9;
  return result;
}

std::vector<IgmCase> collect_igm_cases(const AgentNet& net,
                                       const ParamStore& params, Env& env,
                                       int n_cases, uint64_t seed) {
  if (n_cases < 1) throw ContractError("igm collection: n_cases must be >= 1");
  const EnvInfo info = env.info();
  const int n = info.n_agents;
  const int hidden_dim = net.config().hidden;
  std::vector<IgmCase> cases;
  cases.reserve(static_cast<size_t>(n_cases));

  for (uint64_t episode = 0; static_cast<int>(cases.size()) < n_cases; ++episode) {
    env.reset(derive_seed(seed, 0, episode));
    Rng explore(derive_seed(seed, 1, episode));
    std::vector<int> last_actions(static_cast<size_t>(n), -1);
    Array hidden = Array::zeros({n, hidden_dim});
    while (static_cast<int>(cases.size()) < n_cases) {
      IgmCase icase;
      icase.state = env.state();
      icase.agent_feats = Array::zeros({n, info.obs_dim});
      icase.masks.resize(static_cast<size_t>(n) * static_cast<size_t>(info.n_actions));

      Tape t;
      Array x = Array::zeros({n, net.input_dim()});
      for (int i = 0; i < n; ++i) {
        const Array o = env.obs(i);
        for (int c = 0; c < info.obs_dim; ++c) icase.agent_feats.at(i, c) = o[c];
        const std::vector<uint8_t> mask = env.action_mask(i);
        std::copy(mask.begin(), mask.end(),
                  icase.masks.begin() + static_cast<long>(i) * info.n_actions);
        const Array xi =
            net.make_input(o, last_actions[static_cast<size_t>(i)], i);
        for (int c = 0; c < net.input_dim(); ++c) x.at(i, c) = xi[c];
      }
      const AgentNet::ForwardOut out = net.forward(
          t, params, t.constant(std::move(x)), t.constant(hidden));
      icase.utilities = t.val(out.q);
      hidden = t.val(out.hidden);

      std::vector<int> actions(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        std::vector<uint8_t> mask(
            icase.masks.begin() + static_cast<long>(i) * info.n_actions,
            icase.masks.begin() + static_cast<long>(i + 1) * info.n_actions);
        Array q_row = Array::zeros({1, info.n_actions});
        for (int a = 0; a < info.n_actions; ++a) q_row[a] = icase.utilities.at(i, a);
        actions[static_cast<size_t>(i)] = select_action(q_row, mask, 0.5, explore);
      }
      cases.push_back(std::move(icase));
      const StepResult r = env.step(actions);
      last_actions = actions;
      if (r.terminal) break;
    }
  }
  return cases;
}

}  // namespace qattenlab
