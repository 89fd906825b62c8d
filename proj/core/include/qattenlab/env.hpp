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

#ifndef QATTENLAB_ENV_HPP_
#define QATTENLAB_ENV_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qattenlab/array.hpp"

namespace qattenlab {

struct EnvInfo {
  int n_agents = 0;
  int n_actions = 0;
  int obs_dim = 0;    // per-agent observation width
  int state_dim = 0;  // centralized state width
  int episode_limit = 0;
};

struct StepResult {
  double reward = 0.0;   // shared team reward
  bool terminal = false; // episode over (by outcome or by hitting the limit)
  bool truncated = false;// terminal only because the step limit was reached
};

// Exact solution of an environment: the best achievable discounted return
// and one action sequence attaining it.
struct OracleResult {
  double value = 0.0;
  std::vector<std::vector<int>> policy;  // one joint action per step
};

// Enumeration budget for exact oracles: joint state-action spaces larger
// than this raise CapacityError instead of grinding.
inline constexpr long long kOracleCapacity = 1'000'000;

// Cooperative multi-agent environment with a shared team reward. Episodes
// are fully deterministic functions of the reset seed and the action
// sequence. Agents receive partial observations; the centralized state is
// available to mixers during training but never to the agents.
class Env {
 public:
  virtual ~Env() = default;

  virtual EnvInfo info() const = 0;
  virtual void reset(uint64_t seed) = 0;

  // Valid only between reset() and a terminal step.
  virtual Array obs(int agent) const = 0;  // (1, obs_dim)
  virtual Array state() const = 0;         // (1, state_dim)
  // One flag per action; at least one action is always allowed.
  virtual std::vector<uint8_t> action_mask(int agent) const = 0;

  // Advances one step with a joint action (one entry per agent). Throws
  // ContractError when called after a terminal step, with the wrong number
  // of actions, or with a masked-out action.
  virtual StepResult step(const std::vector<int>& actions) = 0;

  // True when the last episode ended in a success condition (all opponents
  // eliminated, ...). Environments without a success notion return false.
  virtual bool won() const { return false; }

  // Exact optimal discounted return by exhaustive search or finite-horizon
  // value iteration. Throws CapacityError when the joint state-action space
  // exceeds kOracleCapacity (the default: environments whose space cannot
  // be enumerated).
  virtual OracleResult oracle_optimal(double gamma) const;
};

// Builds an environment from its JSON description. The game family is
// identified by its signature field — "payoff" (matrix game), "modes"
// (two-step game), or "grid" (skirmish) — see the fixtures under games/.
// Validates all fields and throws ConfigError on any problem, including
// payoff tensors whose nesting does not match the declared action counts.
std::unique_ptr<Env> make_env_from_json(const std::string& json_text);
std::unique_ptr<Env> load_env(const std::string& path);

}  // namespace qattenlab

#endif  // QATTENLAB_ENV_HPP_
