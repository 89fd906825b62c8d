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

#include "qattenlab/two_step_game.hpp"

#include <algorithm>

#include "qattenlab/error.hpp"

namespace qattenlab {

TwoStepGame::TwoStepGame(std::vector<int> actions, std::vector<double> payoff_a,
                         std::vector<double> payoff_b, int branch_agent,
                         double gamma)
    : actions_(std::move(actions)),
      payoff_a_(std::move(payoff_a)),
      payoff_b_(std::move(payoff_b)),
      branch_agent_(branch_agent),
      gamma_(gamma) {
  if (actions_.empty()) throw ConfigError("two-step game: no agents");
  long long volume = 1;
  for (int a : actions_) {
    if (a <= 0) throw ConfigError("two-step game: action counts must be positive");
    volume *= a;
  }
  for (const std::vector<double>* p : {&payoff_a_, &payoff_b_}) {
    if (volume != static_cast<long long>(p->size())) {
      throw ConfigError("two-step game: a mode payoff has " +
                        std::to_string(p->size()) +
                        " entries but the action counts require " +
                        std::to_string(volume));
    }
  }
  if (branch_agent_ < 0 || branch_agent_ >= static_cast<int>(actions_.size())) {
    throw ConfigError("two-step game: branch agent " +
                      std::to_string(branch_agent_) + " out of range");
  }
  if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) {
    throw ConfigError("two-step game: discount must lie in [0, 1]");
  }
  max_actions_ = *std::max_element(actions_.begin(), actions_.end());
}

EnvInfo TwoStepGame::info() const {
  EnvInfo i;
  i.n_agents = static_cast<int>(actions_.size());
  i.n_actions = max_actions_;
  i.obs_dim = i.n_agents + 1;  // [id one-hot, normalized step]
  i.state_dim = 5;             // [step one-hot (2), mode one-hot (none/A/B)]
  i.episode_limit = 2;
  return i;
}

void TwoStepGame::reset(uint64_t) {
  t_ = 0;
  branch_ = 0;
  done_ = false;
}

Array TwoStepGame::obs(int agent) const {
  const int n = static_cast<int>(actions_.size());
  if (agent < 0 || agent >= n) {
    throw ContractError("two-step game: agent index out of range");
  }
  Array o = Array::zeros({1, n + 1});
  o[agent] = 1.0;
  o[n] = t_ / 2.0;
  return o;
}

Array TwoStepGame::state() const {
  Array s = Array::zeros({1, 5});
  s[std::min(t_, 1)] = 1.0;
  s[2 + branch_] = 1.0;
  return s;
}

std::vector<uint8_t> TwoStepGame::action_mask(int agent) const {
  const int n = static_cast<int>(actions_.size());
  if (agent < 0 || agent >= n) {
    throw ContractError("two-step game: agent index out of range");
  }
  std::vector<uint8_t> mask(static_cast<size_t>(max_actions_), 0);
  for (int a = 0; a < actions_[static_cast<size_t>(agent)]; ++a) {
    mask[static_cast<size_t>(a)] = 1;
  }
  return mask;
}

double TwoStepGame::payoff_at(const std::vector<double>& payoff,
                              const std::vector<int>& joint) const {
  size_t flat = 0;
  for (size_t i = 0; i < joint.size(); ++i) {
    if (joint[i] < 0 || joint[i] >= actions_[i]) {
      throw ContractError("two-step game: action " + std::to_string(joint[i]) +
                          " out of range for agent " + std::to_string(i));
    }
    flat = flat * static_cast<size_t>(actions_[i]) + static_cast<size_t>(joint[i]);
  }
  return payoff[flat];
}

StepResult TwoStepGame::step(const std::vector<int>& actions) {
  if (done_) throw ContractError("two-step game: step after terminal");
  if (actions.size() != actions_.size()) {
    throw ContractError("two-step game: joint action has wrong arity");
  }
  if (t_ == 0) {
    // payoff_at validates every agent's action even though only the branch
    // agent's matters on the first step.
    (void)payoff_at(payoff_a_, actions);
    branch_ = actions[static_cast<size_t>(branch_agent_)] == 0 ? 1 : 2;
    t_ = 1;
    return {0.0, false, false};
  }
  const std::vector<double>& payoff = branch_ == 1 ? payoff_a_ : payoff_b_;
  const double r = payoff_at(payoff, actions);
  done_ = true;
  t_ = 2;
  return {r, true, false};
}

OracleResult TwoStepGame::oracle_optimal(double gamma) const {
  if (2 * static_cast<long long>(payoff_a_.size()) > kOracleCapacity) {
    throw CapacityError("two-step game oracle: joint space exceeds the budget");
  }
  const auto best_of = [&](const std::vector<double>& p) {
    return std::max_element(p.begin(), p.end());
  };
  const auto it_a = best_of(payoff_a_);
  const auto it_b = best_of(payoff_b_);
  const bool pick_a = *it_a >= *it_b;
  const std::vector<double>& payoff = pick_a ? payoff_a_ : payoff_b_;
  size_t flat = static_cast<size_t>((pick_a ? it_a : it_b) - payoff.begin());

  std::vector<int> second(actions_.size(), 0);
  for (size_t i = actions_.size(); i-- > 0;) {
    second[i] = static_cast<int>(flat % static_cast<size_t>(actions_[i]));
    flat /= static_cast<size_t>(actions_[i]);
  }
  std::vector<int> first(actions_.size(), 0);
  // Mode A needs action 0 from the branch agent; any other action picks B.
  first[static_cast<size_t>(branch_agent_)] = pick_a ? 0 : 1;
  if (!pick_a && actions_[static_cast<size_t>(branch_agent_)] < 2) {
    throw ContractError("two-step game oracle: branch agent cannot reach mode B");
  }
  // The first step pays zero, so the optimum is the discounted best entry.
  return {gamma * *(pick_a ? it_a : it_b), {first, second}};
}

}  // namespace qattenlab
