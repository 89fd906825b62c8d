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

#ifndef QATTENLAB_ATTENTION_EXPORT_HPP_
#define QATTENLAB_ATTENTION_EXPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "qattenlab/agent_net.hpp"
#include "qattenlab/env.hpp"
#include "qattenlab/mixers.hpp"

namespace qattenlab {

// Rolls out greedy episodes and serializes the mixer's per-step attention
// records. One CSV per episode, named attention_ep<k>.csv inside out_dir,
// holding three sections back to back:
//
//   step,head,agent,lambda     one row per (step, head, agent)
//   step,head,w                one row per (step, head)
//   step,c                     one row per step
//
// Episode k is seeded derive_seed(seed, 0, k). Returns the written file
// paths. Throws ConfigError when the mixer exposes no attention records
// (it is not an attention variant).
std::vector<std::string> export_attention(const AgentNet& net,
                                          const ParamStore& params,
                                          const Mixer& mixer, Env& env,
                                          int episodes, uint64_t seed,
                                          const std::string& out_dir);

}  // namespace qattenlab

#endif  // QATTENLAB_ATTENTION_EXPORT_HPP_
