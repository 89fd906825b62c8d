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

#ifndef QATTENLAB_SKIRMISH_HPP_
#define QATTENLAB_SKIRMISH_HPP_

#include "qattenlab/env.hpp"
#include "qattenlab/rng.hpp"

namespace qattenlab {

struct SkirmishConfig {
  int width = 8;
  int height = 8;
  int n_allies = 3;
  int n_enemies = 3;
  int sight_range = 4;   // observation radius (Euclidean); must exceed attack
  int attack_range = 2;  // attack radius (Euclidean)
  int episode_limit = 60;
  int unit_health = 10;
  int ally_damage = 2;
  int enemy_damage = 1;
  int attack_cooldown = 1;  // steps an attacker must wait before firing again
  // How reset seeds choose spawn cells: drawn from the seed, or a fixed
  // stacked layout that ignores the seed entirely.
  bool fixed_spawn = false;
};

// Grid-world team skirmish: learned allies against scripted enemies.
//
// Allies spawn in the two leftmost columns, enemies in the two rightmost
// (cells drawn from the reset seed). Each step every living ally submits one
// action:
//
//   0 no-op (dead agents only)   1 stop          2..5 move up/down/left/right
//   6+j attack enemy j (requires enemy j alive, within attack range, and
//       the agent's attack off cooldown)
//
// Scripted enemies each chase their nearest living ally (ties to the lowest
// ally id) and attack it when in range and off cooldown, otherwise step
// along the axis of larger distance (ties to x). Resolution order within a
// step is deterministic: ally moves, enemy decisions, enemy moves, ally
// attacks, enemy attacks, cooldown decay — each sub-phase in unit-id order.
// An attack launched at a target that moved out of range this step misses
// but still spends the cooldown.
//
// The team reward accumulates damage dealt, a bonus per enemy killed, and a
// victory bonus when all enemies fall, scaled so a flawless episode returns
// 20. The episode ends on elimination of either side or at the step limit.
class SkirmishEnv : public Env {
 public:
  explicit SkirmishEnv(SkirmishConfig config);

  EnvInfo info() const override;
  void reset(uint64_t seed) override;
  Array obs(int agent) const override;
  Array state() const override;
  std::vector<uint8_t> action_mask(int agent) const override;
  StepResult step(const std::vector<int>& actions) override;
  bool won() const override { return won_; }

  const SkirmishConfig& config() const { return config_; }
  // Scale applied to raw reward points (damage / kill / victory).
  double reward_scale() const;

  struct Unit {
    int x = 0;
    int y = 0;
    int health = 0;
    int cooldown = 0;
    bool alive() const { return health > 0; }
  };
  const Unit& ally(int i) const { return allies_[static_cast<size_t>(i)]; }
  const Unit& enemy(int j) const { return enemies_[static_cast<size_t>(j)]; }

 private:
  bool occupied(int x, int y) const;
  bool in_bounds(int x, int y) const;
  static int dist2(const Unit& a, const Unit& b);
  int nearest_living_ally(const Unit& e) const;

  SkirmishConfig config_;
  std::vector<Unit> allies_;
  std::vector<Unit> enemies_;
  int t_ = 0;
  bool done_ = true;
  bool won_ = false;
};

}  // namespace qattenlab

#endif  // QATTENLAB_SKIRMISH_HPP_
