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

#include "qattenlab/agent_net.hpp"

#include "qattenlab/error.hpp"

namespace qattenlab {

AgentNet::AgentNet(AgentNetConfig config, std::string prefix)
    : config_(config), prefix_(std::move(prefix)) {
  if (config_.obs_dim <= 0 || config_.n_agents <= 0 || config_.n_actions <= 0 ||
      config_.hidden <= 0) {
    throw ContractError("AgentNet: all dimensions must be positive");
  }
}

std::string AgentNet::param_prefix(int agent) const {
  if (config_.share_params) return prefix_;
  if (agent < 0 || agent >= config_.n_agents) {
    throw ContractError(
        "AgentNet: per-agent parameters require a valid agent index, got " +
        std::to_string(agent));
  }
  return prefix_ + std::to_string(agent);
}

void AgentNet::register_params(ParamStore& store, Rng& rng) const {
  const int h = config_.hidden;
  const int sets = config_.share_params ? 1 : config_.n_agents;
  for (int i = 0; i < sets; ++i) {
    const std::string p = config_.share_params ? prefix_ : param_prefix(i);
    add_linear(store, rng, p + ".fc1", input_dim(), h);
    store.add(p + ".gru.w_ih", init_weight(rng, h, 3 * h));
    store.add(p + ".gru.w_hh", init_weight(rng, h, 3 * h));
    store.add(p + ".gru.b_ih", Array::zeros({1, 3 * h}));
    store.add(p + ".gru.b_hh", Array::zeros({1, 3 * h}));
    add_linear(store, rng, p + ".fc2", h, config_.n_actions);
  }
}

Array AgentNet::make_input(const Array& obs, int last_action, int agent) const {
  if (obs.size() != config_.obs_dim) {
    throw ShapeError("make_input: observation has " + std::to_string(obs.size()) +
                     " values, expected " + std::to_string(config_.obs_dim));
  }
  if (agent < 0 || agent >= config_.n_agents) {
    throw ContractError("make_input: agent index out of range");
  }
  if (last_action >= config_.n_actions) {
    throw ContractError("make_input: last action out of range");
  }
  Array x = Array::zeros({1, input_dim()});
  for (int i = 0; i < config_.obs_dim; ++i) x[i] = obs[i];
  if (last_action >= 0) x[config_.obs_dim + last_action] = 1.0;
  if (config_.append_id) x[config_.obs_dim + config_.n_actions + agent] = 1.0;
  return x;
}

NodeId AgentNet::input_gates(Tape& t, const ParamStore& store, NodeId x_block,
                             int agent) const {
  const std::string p = param_prefix(agent);
  NodeId e = t.relu(t.add_bias(t.matmul(x_block, t.param(store, p + ".fc1.w")),
                               t.param(store, p + ".fc1.b")));
  return t.add_bias(t.matmul(e, t.param(store, p + ".gru.w_ih")),
                    t.param(store, p + ".gru.b_ih"));
}

AgentNet::StepOut AgentNet::recurrent_step(Tape& t, const ParamStore& store,
                                           NodeId xg_block, NodeId h_prev,
                                           int agent) const {
  const std::string p = param_prefix(agent);
  const int h = config_.hidden;
  NodeId hg = t.add_bias(t.matmul(h_prev, t.param(store, p + ".gru.w_hh")),
                         t.param(store, p + ".gru.b_hh"));
  NodeId r = t.sigmoid(t.add(t.slice_cols(xg_block, 0, h), t.slice_cols(hg, 0, h)));
  NodeId z = t.sigmoid(
      t.add(t.slice_cols(xg_block, h, 2 * h), t.slice_cols(hg, h, 2 * h)));
  NodeId n = t.tanh(t.add(t.slice_cols(xg_block, 2 * h, 3 * h),
                          t.mul(r, t.slice_cols(hg, 2 * h, 3 * h))));
  // h' = (1 - z) * n + z * h  =  n - z*n + z*h.
  NodeId next = t.add(t.sub(n, t.mul(z, n)), t.mul(z, h_prev));
  return {next};
}

NodeId AgentNet::utilities(Tape& t, const ParamStore& store, NodeId h_block,
                           int agent) const {
  const std::string p = param_prefix(agent);
  return t.add_bias(t.matmul(h_block, t.param(store, p + ".fc2.w")),
                    t.param(store, p + ".fc2.b"));
}

AgentNet::ForwardOut AgentNet::forward(Tape& t, const ParamStore& store,
                                       NodeId x_block, NodeId h_prev,
                                       int agent) const {
  NodeId xg = input_gates(t, store, x_block, agent);
  StepOut step = recurrent_step(t, store, xg, h_prev, agent);
  return {utilities(t, store, step.hidden, agent), step.hidden};
}

int greedy_action(const Array& q_row, const std::vector<uint8_t>& mask) {
  if (q_row.size() != static_cast<int>(mask.size())) {
    throw ShapeError("greedy_action: " + std::to_string(q_row.size()) +
                     " utilities vs " + std::to_string(mask.size()) + " mask bits");
  }
  int best = -1;
  double best_q = 0.0;
  for (int a = 0; a < q_row.size(); ++a) {
    if (!mask[static_cast<size_t>(a)]) continue;
    if (best < 0 || q_row[a] > best_q) {
      best = a;
      best_q = q_row[a];
    }
  }
  if (best < 0) throw ContractError("greedy_action: no allowed action");
  return best;
}

int select_action(const Array& q_row, const std::vector<uint8_t>& mask,
                  double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.u01() < epsilon) {
    int allowed = 0;
    for (uint8_t m : mask) allowed += m != 0;
    if (allowed == 0) throw ContractError("select_action: no allowed action");
    int pick = rng.uniform_int(allowed);
    for (int a = 0; a < static_cast<int>(mask.size()); ++a) {
      if (mask[static_cast<size_t>(a)] && pick-- == 0) return a;
    }
  }
  return greedy_action(q_row, mask);
}

}  // namespace qattenlab
