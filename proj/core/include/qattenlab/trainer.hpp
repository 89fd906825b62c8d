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

#ifndef QATTENLAB_TRAINER_HPP_
#define QATTENLAB_TRAINER_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qattenlab/agent_net.hpp"
#include "qattenlab/checkpoint.hpp"
#include "qattenlab/env.hpp"
#include "qattenlab/mixers.hpp"
#include "qattenlab/optimizer.hpp"
#include "qattenlab/replay_buffer.hpp"

namespace qattenlab {

// Hyperparameters of one training run. Mixer kinds are those of
// make_mixer() plus "iql", which trains each agent on its own TD target
// with no joint mixing.
struct TrainConfig {
  std::string mixer = "attention";
  long long total_steps = 0;     // environment steps to train for
  double gamma = 0.99;
  int batch_size = 32;           // episodes per gradient step
  int buffer_capacity = 5000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  // Environment steps over which epsilon decays linearly; -1 picks the
  // default min(50000, total_steps / 4).
  long long anneal_steps = -1;
  int target_update_episodes = 200;  // hard target refresh cadence
  long long eval_interval = 1000;    // environment steps between evaluations
  int eval_episodes = 32;
  uint64_t seed = 1;
  bool share_agent_params = true;
  RmsPropConfig optimizer;
  double grad_clip = 10.0;

  // Fills defaults (anneal window) and throws ConfigError on any violated
  // range: gamma in (0, 1], positive batch/buffer/eval settings, anneal
  // window not exceeding total steps.
  void validate_and_finalize();
};

// One metric row, produced at every evaluation point.
struct EvalRow {
  long long step = 0;      // environment steps consumed so far
  double median_return = 0.0;
  double mean_return = 0.0;
  double win_rate = 0.0;
  double loss = 0.0;       // most recent training loss (0 before training)
  double epsilon = 0.0;    // exploration rate at this step
};

struct EvalStats {
  double median_return = 0.0;
  double mean_return = 0.0;
  double win_rate = 0.0;
};

// Collects one episode by acting in env with the given parameters.
// Actions are chosen from local observations and recurrent state only;
// the centralized state is recorded for the mixer but never consulted.
// epsilon_at maps a global environment-step index to the exploration rate.
Episode collect_episode(const AgentNet& net, const ParamStore& params,
                        Env& env, uint64_t env_seed,
                        const std::function<double(long long)>& epsilon_at,
                        long long env_steps_base, Rng& explore_rng);

// Squared TD error, averaged over every real step of the batch. The online
// side builds one differentiable graph across all episodes and timesteps;
// targets come from a frozen value-only pass with target parameters
// (per-agent masked greedy utilities mixed by the target mixer). mixer may
// be null for independent per-agent learning, in which case the loss
// averages over (step, agent) pairs. Throws ContractError on an empty batch.
NodeId td_loss(Tape& tape, const std::vector<const Episode*>& batch,
               const AgentNet& net, const ParamStore& online,
               const Mixer* mixer, const ParamStore& target, double gamma);

// The training loop: collect -> store -> sample -> descend, with hard
// target refreshes, periodic greedy evaluation, and checkpoint callbacks.
// All randomness derives from config.seed and the loop counters, so a run
// is reproducible and resumable at any episode boundary.
class Trainer {
 public:
  Trainer(TrainConfig config, std::unique_ptr<Env> env);

  // Fresh parameter initialization (online, target, optimizer).
  void init();

  struct Hooks {
    std::function<void(const EvalRow&)> on_eval;
    std::function<void(long long step)> on_checkpoint;  // periodic snapshots
  };
  // Runs until total_steps environment steps have been consumed. When
  // checkpoint_interval > 0, on_checkpoint fires whenever that many steps
  // are crossed. last_metric_step is the step of the last metric row
  // already emitted for this run (-1 when none), used to avoid duplicating
  // rows after a resume.
  void run(const Hooks& hooks, long long checkpoint_interval = 0,
           long long last_metric_step = -1);

  // Greedy evaluation over the configured episode count, on seeds derived
  // from the run seed (fixed per run, independent of training progress).
  EvalStats evaluate();

  // Exploration rate after a given number of environment steps.
  double epsilon_at(long long env_steps) const;

  Checkpoint make_checkpoint(bool include_buffer) const;
  void restore(const Checkpoint& ckpt);

  const TrainConfig& config() const { return config_; }
  const AgentNet& net() const { return *net_; }
  const Mixer* mixer() const { return mixer_.get(); }
  const ParamStore& params() const { return params_; }
  ParamStore& params_mut() { return params_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  Env& env() { return *env_; }
  long long env_steps() const { return env_steps_; }
  long long episodes_done() const { return episodes_done_; }
  long long train_steps() const { return train_steps_; }
  double last_loss() const { return last_loss_; }

 private:
  void train_once();
  EvalRow current_eval_row();

  TrainConfig config_;
  std::unique_ptr<Env> env_;
  std::unique_ptr<AgentNet> net_;
  std::unique_ptr<Mixer> mixer_;  // null for iql
  ParamStore params_;
  ParamStore target_params_;
  RmsProp opt_;
  ReplayBuffer buffer_;
  long long episodes_done_ = 0;
  long long env_steps_ = 0;
  long long train_steps_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace qattenlab

#endif  // QATTENLAB_TRAINER_HPP_
