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

#ifndef QATTENLAB_IGM_HPP_
#define QATTENLAB_IGM_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "qattenlab/agent_net.hpp"
#include "qattenlab/env.hpp"
#include "qattenlab/mixers.hpp"

namespace qattenlab {

// One frozen decision point: the centralized state, the per-agent mixer
// features, every agent's utility row, and which actions are allowed.
struct IgmCase {
  Array state;        // (1, state_dim)
  Array agent_feats;  // (n_agents, feat_dim)
  Array utilities;    // (n_agents, n_actions)
  // Flat (n_agents * n_actions) allowed flags; empty means "all allowed".
  std::vector<uint8_t> masks;
};

// Verdict of one individual-global-max consistency check: whether the joint
// action assembled from per-agent greedy choices attains the exhaustive
// maximum of the mixed value over all allowed joint actions.
struct IgmResult {
  bool consistent = false;
  double greedy_value = 0.0;
  double best_value = 0.0;
  std::vector<int> greedy_actions;
  std::vector<int> best_actions;
};

// Largest joint-action space check_igm will enumerate before refusing.
inline constexpr long long kIgmCapacity = 100000;

// Exhaustively verifies greedy consistency of a mixer at one decision point.
// Every allowed joint action becomes one row of a single batched mixer
// evaluation. Per-agent greedy choices break ties toward the lowest action
// index, and so does the exhaustive maximum, making the verdict
// deterministic. Values within 1e-9 of the maximum count as attaining it.
// Throws CapacityError when the allowed joint space exceeds kIgmCapacity.
IgmResult check_igm(const Mixer& mixer, const ParamStore& store,
                    const IgmCase& icase);

// Collects decision points by rolling out the given utility network with
// epsilon-greedy exploration (epsilon 0.5), recording the state, the
// observation rows (as mixer features), the utility rows, and the masks at
// every step until n_cases are gathered.
std::vector<IgmCase> collect_igm_cases(const AgentNet& net,
                                       const ParamStore& params, Env& env,
                                       int n_cases, uint64_t seed);

}  // namespace qattenlab

#endif  // QATTENLAB_IGM_HPP_
