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

#include "qattenlab/replay_buffer.hpp"

#include <numeric>

#include "qattenlab/error.hpp"

namespace qattenlab {

int Episode::length() const {
  int n = 0;
  for (const EpisodeStep& s : steps) n += s.padded ? 0 : 1;
  return n;
}

double Episode::total_reward() const {
  double sum = 0.0;
  for (const EpisodeStep& s : steps) {
    if (!s.padded) sum += s.reward;
  }
  return sum;
}

void Episode::validate() const {
  const int real = length();
  if (real == 0) throw ContractError("episode: no real steps");
  for (size_t t = 0; t < steps.size(); ++t) {
    const EpisodeStep& s = steps[t];
    const bool in_suffix = t >= static_cast<size_t>(real);
    if (s.padded != in_suffix) {
      throw ContractError("episode: padded steps must form a trailing suffix");
    }
    const bool is_last_real = t + 1 == static_cast<size_t>(real);
    if (!s.padded && s.terminal != is_last_real) {
      throw ContractError(
          "episode: exactly the last real step must be terminal");
    }
  }
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw ContractError("replay buffer: capacity must be >= 1");
}

void ReplayBuffer::add(Episode episode) {
  episode.validate();
  episodes_.push_back(std::move(episode));
  while (static_cast<int>(episodes_.size()) > capacity_) {
    episodes_.pop_front();
  }
}

std::vector<const Episode*> ReplayBuffer::sample(int n, Rng& rng) const {
  if (n < 1 || n > size()) {
    throw ContractError("replay buffer: cannot sample " + std::to_string(n) +
                        " of " + std::to_string(size()) + " episodes");
  }
  std::vector<int> index(episodes_.size());
  std::iota(index.begin(), index.end(), 0);
  std::vector<const Episode*> out;
  out.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int j = i + rng.uniform_int(static_cast<int>(index.size()) - i);
    std::swap(index[static_cast<size_t>(i)], index[static_cast<size_t>(j)]);
    out.push_back(&episodes_[static_cast<size_t>(index[static_cast<size_t>(i)])]);
  }
  return out;
}

void ReplayBuffer::restore(std::vector<Episode> episodes) {
  if (static_cast<int>(episodes.size()) > capacity_) {
    throw ContractError("replay buffer: restore exceeds capacity");
  }
  episodes_.clear();
  for (Episode& e : episodes) add(std::move(e));
}

}  // namespace qattenlab
