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

#ifndef QATTENLAB_AGENT_NET_HPP_
#define QATTENLAB_AGENT_NET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qattenlab/rng.hpp"
#include "qattenlab/tape.hpp"

namespace qattenlab {

struct AgentNetConfig {
  int obs_dim = 0;
  int n_agents = 0;
  int n_actions = 0;
  int hidden = 64;  // width of the embedding layer and the recurrent state
  // One parameter set for all agents (true) vs a private set per agent.
  bool share_params = true;
  // Append a one-hot agent id to the input (the usual companion of sharing).
  bool append_id = true;
};

// Per-agent utility network:
//
//   x = [observation, one-hot last action, one-hot agent id]
//   e = relu(fc1(x))
//   h' = GRU(e, h)
//   q = fc2(h')                           (one utility per action)
//
// The last-action slot is all zeros on the first step of an episode; the
// agent-id slot is present only when append_id is set.
//
// The gated recurrent unit uses the fused-gate convention with gate order
// [reset | update | candidate]:
//   r = sigmoid(xg_r + hg_r)
//   z = sigmoid(xg_z + hg_z)
//   n = tanh(xg_n + r * hg_n)
//   h' = (1 - z) * n + z * h
// where xg = e*W_ih + b_ih and hg = h*W_hh + b_hh are the (rows, 3H)
// input-side and hidden-side gate preactivations.
//
// All tape entry points operate on blocks of agent-rows, so one call can
// cover every agent of every episode in a batch. The input-side projections
// (fc1 and xg) have no sequential dependency and are exposed separately from
// the recurrent completion, letting a trainer batch them across a whole
// episode before walking timesteps.
// With share_params, one parameter set serves every agent and the block
// entry points may mix rows of different agents (pass agent = -1). Without
// sharing, each agent owns a private parameter set and every block must be
// homogeneous in one agent, named by the agent argument.
class AgentNet {
 public:
  explicit AgentNet(AgentNetConfig config, std::string prefix = "agent");

  const AgentNetConfig& config() const { return config_; }
  int input_dim() const {
    return config_.obs_dim + config_.n_actions +
           (config_.append_id ? config_.n_agents : 0);
  }

  void register_params(ParamStore& store, Rng& rng) const;

  // Builds the [obs, last-action one-hot, id one-hot] input row for one
  // agent. last_action = -1 means "no previous action" (episode start) and
  // leaves that slot all zeros.
  Array make_input(const Array& obs, int last_action, int agent) const;

  // Input-side gate preactivations for a block of rows: (rows, input_dim)
  // -> (rows, 3H). Internally applies fc1 + relu.
  NodeId input_gates(Tape& t, const ParamStore& store, NodeId x_block,
                     int agent = -1) const;

  struct StepOut {
    NodeId hidden;  // (rows, H) next recurrent state
  };
  // One recurrent step: xg_block (rows, 3H) from input_gates, h_prev
  // (rows, H) -> next hidden (rows, H).
  StepOut recurrent_step(Tape& t, const ParamStore& store, NodeId xg_block,
                         NodeId h_prev, int agent = -1) const;

  // Action utilities for a block of hidden rows: (rows, H) -> (rows, A).
  NodeId utilities(Tape& t, const ParamStore& store, NodeId h_block,
                   int agent = -1) const;

  // Convenience single-step forward: inputs (rows, input_dim) and previous
  // hidden (rows, H) -> utilities (rows, A) plus next hidden.
  struct ForwardOut {
    NodeId q;
    NodeId hidden;
  };
  ForwardOut forward(Tape& t, const ParamStore& store, NodeId x_block,
                     NodeId h_prev, int agent = -1) const;

 private:
  // Parameter-name prefix serving the given agent ("agent" shared, or
  // "agent3" private). Validates the agent argument against the sharing mode.
  std::string param_prefix(int agent) const;

  AgentNetConfig config_;
  std::string prefix_;
};

// Epsilon-greedy action selection over one agent's utility row, restricted
// to the allowed actions (mask entries != 0). Greedy ties break to the
// lowest action index; the exploration branch draws uniformly over allowed
// actions. Throws ContractError if no action is allowed.
int select_action(const Array& q_row, const std::vector<uint8_t>& mask,
                  double epsilon, Rng& rng);

// Greedy argmax over allowed actions (lowest index wins ties).
int greedy_action(const Array& q_row, const std::vector<uint8_t>& mask);

}  // namespace qattenlab

#endif  // QATTENLAB_AGENT_NET_HPP_
