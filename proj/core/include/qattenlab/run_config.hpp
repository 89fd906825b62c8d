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

#ifndef QATTENLAB_RUN_CONFIG_HPP_
#define QATTENLAB_RUN_CONFIG_HPP_

#include <string>

#include "qattenlab/trainer.hpp"

namespace qattenlab {

// A full experiment description: the training hyperparameters plus the
// run plumbing (environment file, output directory, checkpoint cadence,
// whether to export attention records after training, and whether
// checkpoints should carry the replay buffer).
struct RunConfig {
  TrainConfig train;
  std::string env_path;
  std::string out_dir = "runs";
  long long checkpoint_interval = 0;  // env steps between checkpoints; 0 = none
  bool export_attention = false;
  // Replay buffer inside checkpoints: required for exact resume, but large
  // for long-horizon environments, so it can be turned off for runs that
  // will never be resumed.
  bool checkpoint_buffer = true;
};

// Parses and validates a JSON run config. Keys (all optional except env):
//
//   env                     path to an environment description (must exist)
//   mixer                   "attention" | "attention_weighted" |
//                           "attention_nonlinear" | "vdn" | "hypernet" | "iql"
//   total_steps             environment steps to train for
//   gamma                   discount in (0, 1]
//   batch_size              episodes per gradient step
//   buffer_capacity         replay capacity in episodes
//   epsilon_start/epsilon_end/anneal_steps   exploration schedule
//   target_update_episodes  hard target-copy cadence
//   eval_interval           env steps between metric rows
//   eval_episodes           greedy episodes per evaluation
//   seed                    master seed
//   share_agent_params      one utility net for all agents
//   learning_rate, rms_smoothing, rms_epsilon   optimizer settings
//   grad_clip               global gradient-norm ceiling
//   out_dir                 output directory (created on parse); when the
//                           QATTEN_LAB_OUT environment variable is set and
//                           out_dir is relative, it is resolved under that
//                           root instead of the working directory
//   checkpoint_interval     env steps between checkpoints (0 = none)
//   export_attention        write attention records after training
//   checkpoint_buffer       carry the replay buffer inside checkpoints
//
// Unknown keys are rejected; every error message names the file and the
// offending key. The environment file must exist at parse time and the
// output directory is created (and must be writable).
RunConfig parse_run_config(const std::string& path);

}  // namespace qattenlab

#endif  // QATTENLAB_RUN_CONFIG_HPP_
