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

#ifndef QATTENLAB_REPLAY_BUFFER_HPP_
#define QATTENLAB_REPLAY_BUFFER_HPP_

#include <cstdint>
#include <deque>
#include <vector>

#include "qattenlab/array.hpp"
#include "qattenlab/rng.hpp"

namespace qattenlab {

// One recorded environment transition, as seen by every agent.
struct EpisodeStep {
  Array obs;    // (n_agents, obs_dim), one row per agent, taken before acting
  Array state;  // (1, state_dim) centralized state before acting
  std::vector<uint8_t> masks;    // n_agents * n_actions allowed-action flags
  std::vector<int> actions;      // chosen action per agent
  std::vector<int> last_actions; // previous step's actions; -1 on the first step
  double reward = 0.0;           // shared team reward
  bool terminal = false;
  bool truncated = false;        // terminal only because the limit was hit
  bool padded = false;           // alignment filler; contributes nothing
};

// One full episode. Real steps come first; padded steps, if any, may only
// trail the terminal step and are ignored by training. The last real step is
// the unique terminal one.
struct Episode {
  std::vector<EpisodeStep> steps;

  // Count of real (unpadded) steps.
  int length() const;
  // Undiscounted sum of real-step rewards.
  double total_reward() const;
  // Throws ContractError unless exactly the last real step is terminal and
  // padded steps form a suffix.
  void validate() const;
};

// Fixed-capacity episodic replay with strictly FIFO eviction: once full,
// each insertion drops the oldest episode.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(episodes_.size()); }

  // Validates the episode, appends it, and evicts the oldest when over
  // capacity.
  void add(Episode episode);

  // n distinct episodes drawn uniformly without replacement. Throws
  // ContractError when n exceeds the current size. Pointers stay valid until
  // the next add().
  std::vector<const Episode*> sample(int n, Rng& rng) const;

  // Oldest-to-newest access, used by checkpointing.
  const std::deque<Episode>& episodes() const { return episodes_; }
  // Replaces the contents (oldest first), validating each episode.
  void restore(std::vector<Episode> episodes);

 private:
  int capacity_;
  std::deque<Episode> episodes_;
};

}  // namespace qattenlab

#endif  // QATTENLAB_REPLAY_BUFFER_HPP_
