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

#include "qattenlab/matrix_game.hpp"

#include <algorithm>

#include "qattenlab/error.hpp"

namespace qattenlab {

MatrixGame::MatrixGame(std::vector<int> actions, std::vector<double> payoff)
    : actions_(std::move(actions)), payoff_(std::move(payoff)) {
  if (actions_.empty()) throw ConfigError("matrix game: no agents");
  long long volume = 1;
  for (int a : actions_) {
    if (a <= 0) throw ConfigError("matrix game: action counts must be positive");
    volume *= a;
  }
  if (volume != static_cast<long long>(payoff_.size())) {
    throw ConfigError("matrix game: payoff has " + std::to_string(payoff_.size()) +
                      " entries but the action counts require " +
                      std::to_string(volume));
  }
  max_actions_ = *std::max_element(actions_.begin(), actions_.end());
}

EnvInfo MatrixGame::info() const {
  EnvInfo i;
  i.n_agents = static_cast<int>(actions_.size());
  i.n_actions = max_actions_;
  i.obs_dim = i.n_agents;  // one-hot id
  i.state_dim = 1;
  i.episode_limit = 1;
  return i;
}

void MatrixGame::reset(uint64_t) { done_ = false; }

Array MatrixGame::obs(int agent) const {
  if (agent < 0 || agent >= static_cast<int>(actions_.size())) {
    throw ContractError("matrix game: agent index out of range");
  }
  Array o = Array::zeros({1, static_cast<int>(actions_.size())});
  o[agent] = 1.0;
  return o;
}

Array MatrixGame::state() const { return Array::row({1.0}); }

std::vector<uint8_t> MatrixGame::action_mask(int agent) const {
  if (agent < 0 || agent >= static_cast<int>(actions_.size())) {
    throw ContractError("matrix game: agent index out of range");
  }
  std::vector<uint8_t> mask(static_cast<size_t>(max_actions_), 0);
  for (int a = 0; a < actions_[static_cast<size_t>(agent)]; ++a) mask[static_cast<size_t>(a)] = 1;
  return mask;
}

double MatrixGame::payoff_at(const std::vector<int>& joint) const {
  if (joint.size() != actions_.size()) {
    throw ContractError("matrix game: joint action has wrong arity");
  }
  size_t flat = 0;
  for (size_t i = 0; i < joint.size(); ++i) {
    if (joint[i] < 0 || joint[i] >= actions_[i]) {
      throw ContractError("matrix game: action " + std::to_string(joint[i]) +
                          " out of range for agent " + std::to_string(i));
    }
    flat = flat * static_cast<size_t>(actions_[i]) + static_cast<size_t>(joint[i]);
  }
  return payoff_[flat];
}

StepResult MatrixGame::step(const std::vector<int>& actions) {
  if (done_) throw ContractError("matrix game: step after terminal");
  const double r = payoff_at(actions);
  done_ = true;
  return {r, /*terminal=*/true, /*truncated=*/false};
}

OracleResult MatrixGame::oracle_optimal(double) const {
  if (static_cast<long long>(payoff_.size()) > kOracleCapacity) {
    throw CapacityError("matrix game oracle: " + std::to_string(payoff_.size()) +
                        " joint actions exceed the enumeration budget");
  }
  const auto it = std::max_element(payoff_.begin(), payoff_.end());
  size_t flat = static_cast<size_t>(it - payoff_.begin());
  std::vector<int> joint(actions_.size(), 0);
  for (size_t i = actions_.size(); i-- > 0;) {
    joint[i] = static_cast<int>(flat % static_cast<size_t>(actions_[i]));
    flat /= static_cast<size_t>(actions_[i]);
  }
  return {*it, {joint}};
}

}  // namespace qattenlab
