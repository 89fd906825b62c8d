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

#ifndef QATTENLAB_MATRIX_GAME_HPP_
#define QATTENLAB_MATRIX_GAME_HPP_

#include <vector>

#include "qattenlab/env.hpp"

namespace qattenlab {

// One-shot cooperative matrix game: every agent picks an action
// simultaneously, the team receives the payoff at that joint index, and the
// episode ends. Observations are the agent's one-hot id; the centralized
// state is the constant [1].
class MatrixGame : public Env {
 public:
  // actions[i] is agent i's action count; payoff is the row-major flat
  // tensor over joint actions (last agent's index varies fastest). The
  // payoff size must match the product of the action counts exactly.
  MatrixGame(std::vector<int> actions, std::vector<double> payoff);

  EnvInfo info() const override;
  void reset(uint64_t seed) override;
  Array obs(int agent) const override;
  Array state() const override;
  std::vector<uint8_t> action_mask(int agent) const override;
  StepResult step(const std::vector<int>& actions) override;
  OracleResult oracle_optimal(double gamma) const override;

  double payoff_at(const std::vector<int>& joint) const;

 private:
  std::vector<int> actions_;
  std::vector<double> payoff_;
  int max_actions_ = 0;
  bool done_ = true;
};

}  // namespace qattenlab

#endif  // QATTENLAB_MATRIX_GAME_HPP_
