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

#ifndef QATTENLAB_TWO_STEP_GAME_HPP_
#define QATTENLAB_TWO_STEP_GAME_HPP_

#include <vector>

#include "qattenlab/env.hpp"

namespace qattenlab {

// Two-step branching game. In the first step one designated agent's action
// selects which payoff tensor is played (action 0 -> mode A, otherwise mode
// B) and the reward is zero; in the second step the joint action indexes the
// selected tensor and the episode ends. The committed mode is only visible
// through the centralized state, which one-hot encodes the step number and
// the mode — a minimal setting where state-aware mixing matters.
class TwoStepGame : public Env {
 public:
  // actions[i] is agent i's action count; the payoff tensors are row-major
  // flat over joint actions (last agent's index varies fastest) and must
  // both match the product of the action counts. branch_agent names the
  // agent whose first-step action picks the mode. gamma is the discount the
  // fixture was designed for (used when reporting its oracle value).
  TwoStepGame(std::vector<int> actions, std::vector<double> payoff_a,
              std::vector<double> payoff_b, int branch_agent, double gamma);

  EnvInfo info() const override;
  void reset(uint64_t seed) override;
  Array obs(int agent) const override;
  Array state() const override;
  std::vector<uint8_t> action_mask(int agent) const override;
  StepResult step(const std::vector<int>& actions) override;
  OracleResult oracle_optimal(double gamma) const override;

  double discount() const { return gamma_; }

 private:
  double payoff_at(const std::vector<double>& payoff,
                   const std::vector<int>& joint) const;

  std::vector<int> actions_;
  std::vector<double> payoff_a_;
  std::vector<double> payoff_b_;
  int branch_agent_ = 0;
  double gamma_ = 0.99;
  int max_actions_ = 0;
  int t_ = 0;
  int branch_ = 0;  // 0 = undecided, 1 = A, 2 = B
  bool done_ = true;
};

}  // namespace qattenlab

#endif  // QATTENLAB_TWO_STEP_GAME_HPP_
