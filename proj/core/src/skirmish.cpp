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

#include "qattenlab/skirmish.hpp"

#include <cmath>
#include <cstdlib>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

constexpr int kNoop = 0;
constexpr int kStop = 1;
constexpr int kFirstMove = 2;
constexpr int kFirstAttack = 6;
// up, down, left, right
constexpr int kDx[4] = {0, 0, -1, 1};
constexpr int kDy[4] = {-1, 1, 0, 0};

}  // namespace

SkirmishEnv::SkirmishEnv(SkirmishConfig config) : config_(config) {
  if (config_.width < 4 || config_.height < 1 || config_.n_allies < 1 ||
      config_.n_enemies < 1 || config_.sight_range < 1 ||
      config_.attack_range < 1 || config_.episode_limit < 1 ||
      config_.unit_health < 1 || config_.ally_damage < 1 ||
      config_.enemy_damage < 1 || config_.attack_cooldown < 0) {
    throw ConfigError("skirmish: invalid configuration value");
  }
  if (config_.sight_range <= config_.attack_range) {
    throw ConfigError("skirmish: sight radius must exceed attack radius");
  }
  if (2 * config_.height < config_.n_allies ||
      2 * config_.height < config_.n_enemies) {
    throw ConfigError(
        "skirmish: spawn columns cannot place every unit without overlap");
  }
}

EnvInfo SkirmishEnv::info() const {
  EnvInfo i;
  i.n_agents = config_.n_allies;
  i.n_actions = kFirstAttack + config_.n_enemies;
  // Own [health, cooldown, x, y] plus [distance, dx, dy, health] per other
  // unit (teammates first, then enemies), all normalized.
  i.obs_dim = 4 + 4 * (config_.n_allies - 1 + config_.n_enemies);
  // Per ally [health, cooldown, rel x, rel y]; per enemy [health, rel x, rel y].
  i.state_dim = 4 * config_.n_allies + 3 * config_.n_enemies;
  i.episode_limit = config_.episode_limit;
  return i;
}

double SkirmishEnv::reward_scale() const {
  const double raw_max = config_.n_enemies * config_.unit_health  // damage
                         + 10.0 * config_.n_enemies               // kills
                         + 200.0;                                 // victory
  return 20.0 / raw_max;
}

bool SkirmishEnv::in_bounds(int x, int y) const {
  return x >= 0 && x < config_.width && y >= 0 && y < config_.height;
}

bool SkirmishEnv::occupied(int x, int y) const {
  for (const Unit& u : allies_) {
    if (u.alive() && u.x == x && u.y == y) return true;
  }
  for (const Unit& u : enemies_) {
    if (u.alive() && u.x == x && u.y == y) return true;
  }
  return false;
}

int SkirmishEnv::dist2(const Unit& a, const Unit& b) {
  const int dx = a.x - b.x;
  const int dy = a.y - b.y;
  return dx * dx + dy * dy;
}

void SkirmishEnv::reset(uint64_t seed) {
  Rng rng(seed);
  allies_.assign(static_cast<size_t>(config_.n_allies), Unit{});
  enemies_.assign(static_cast<size_t>(config_.n_enemies), Unit{});
  auto spawn = [&](std::vector<Unit>& team, int x0) {
    int slot = 0;
    for (Unit& u : team) {
      u.health = config_.unit_health;
      u.cooldown = 0;
      if (config_.fixed_spawn) {
        u.x = x0 + slot / config_.height;
        u.y = slot % config_.height;
        ++slot;
        continue;
      }
      do {
        u.x = x0 + rng.uniform_int(2);
        u.y = rng.uniform_int(config_.height);
      } while ([&] {
        for (const Unit& other : team) {
          if (&other != &u && other.health > 0 && other.x == u.x && other.y == u.y) {
            return true;
          }
        }
        return false;
      }());
    }
  };
  spawn(allies_, 0);
  spawn(enemies_, config_.width - 2);
  t_ = 0;
  done_ = false;
  won_ = false;
}

Array SkirmishEnv::obs(int agent) const {
  if (agent < 0 || agent >= config_.n_allies) {
    throw ContractError("skirmish: agent index out of range");
  }
  Array o = Array::zeros({1, info().obs_dim});
  const Unit& self = allies_[static_cast<size_t>(agent)];
  if (!self.alive()) return o;  // dead agents observe nothing

  const double wn = config_.width - 1;
  const double hn = config_.height - 1;
  o[0] = static_cast<double>(self.health) / config_.unit_health;
  o[1] = config_.attack_cooldown > 0
             ? static_cast<double>(self.cooldown) / config_.attack_cooldown
             : 0.0;
  o[2] = self.x / wn;
  o[3] = self.y / hn;

  int slot = 1;
  auto write_unit = [&](const Unit& u) {
    const int base = slot * 4;
    ++slot;
    if (!u.alive()) return;
    const int d2 = dist2(self, u);
    if (d2 > config_.sight_range * config_.sight_range) return;
    o[base + 0] = std::sqrt(static_cast<double>(d2)) / config_.sight_range;
    o[base + 1] = (u.x - self.x) / wn;
    o[base + 2] = (u.y - self.y) / hn;
    o[base + 3] = static_cast<double>(u.health) / config_.unit_health;
  };
  for (int i = 0; i < config_.n_allies; ++i) {
    if (i != agent) write_unit(allies_[static_cast<size_t>(i)]);
  }
  for (int j = 0; j < config_.n_enemies; ++j) write_unit(enemies_[static_cast<size_t>(j)]);
  return o;
}

Array SkirmishEnv::state() const {
  Array s = Array::zeros({1, info().state_dim});
  const double cx = (config_.width - 1) / 2.0;
  const double cy = (config_.height - 1) / 2.0;
  const double wn = config_.width - 1;
  const double hn = config_.height - 1;
  int base = 0;
  for (const Unit& u : allies_) {
    if (u.alive()) {
      s[base + 0] = static_cast<double>(u.health) / config_.unit_health;
      s[base + 1] = config_.attack_cooldown > 0
                        ? static_cast<double>(u.cooldown) / config_.attack_cooldown
                        : 0.0;
      s[base + 2] = (u.x - cx) / wn;
      s[base + 3] = (u.y - cy) / hn;
    }
    base += 4;
  }
  for (const Unit& u : enemies_) {
    if (u.alive()) {
      s[base + 0] = static_cast<double>(u.health) / config_.unit_health;
      s[base + 1] = (u.x - cx) / wn;
      s[base + 2] = (u.y - cy) / hn;
    }
    base += 3;
  }
  return s;
}

std::vector<uint8_t> SkirmishEnv::action_mask(int agent) const {
  if (agent < 0 || agent >= config_.n_allies) {
    throw ContractError("skirmish: agent index out of range");
  }
  std::vector<uint8_t> mask(static_cast<size_t>(info().n_actions), 0);
  const Unit& self = allies_[static_cast<size_t>(agent)];
  if (!self.alive()) {
    mask[kNoop] = 1;
    return mask;
  }
  mask[kStop] = 1;
  for (int d = 0; d < 4; ++d) {
    const int nx = self.x + kDx[d];
    const int ny = self.y + kDy[d];
    if (in_bounds(nx, ny) && !occupied(nx, ny)) mask[static_cast<size_t>(kFirstMove + d)] = 1;
  }
  if (self.cooldown == 0) {
    for (int j = 0; j < config_.n_enemies; ++j) {
      const Unit& e = enemies_[static_cast<size_t>(j)];
      if (e.alive() && dist2(self, e) <= config_.attack_range * config_.attack_range) {
        mask[static_cast<size_t>(kFirstAttack + j)] = 1;
      }
    }
  }
  return mask;
}

int SkirmishEnv::nearest_living_ally(const Unit& e) const {
  int best = -1;
  int best_d2 = 0;
  for (int i = 0; i < config_.n_allies; ++i) {
    const Unit& a = allies_[static_cast<size_t>(i)];
    if (!a.alive()) continue;
    const int d2 = dist2(e, a);
    if (best < 0 || d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

StepResult SkirmishEnv::step(const std::vector<int>& actions) {
  if (done_) throw ContractError("skirmish: step after terminal");
  if (actions.size() != static_cast<size_t>(config_.n_allies)) {
    throw ContractError("skirmish: joint action has wrong arity");
  }
  for (int i = 0; i < config_.n_allies; ++i) {
    const int a = actions[static_cast<size_t>(i)];
    if (a < 0 || a >= info().n_actions) {
      throw ContractError("skirmish: agent " + std::to_string(i) +
                          " submitted out-of-range action " + std::to_string(a));
    }
    const std::vector<uint8_t> mask = action_mask(i);
    if (!mask[static_cast<size_t>(a)]) {
      throw ContractError("skirmish: agent " + std::to_string(i) +
                          " submitted masked-out action " + std::to_string(a));
    }
  }

  double raw_reward = 0.0;
  std::vector<bool> ally_attacked(static_cast<size_t>(config_.n_allies), false);
  std::vector<bool> enemy_attacked(static_cast<size_t>(config_.n_enemies), false);

  // Phase 1: ally moves, in id order; a blocked move becomes a stop.
  for (int i = 0; i < config_.n_allies; ++i) {
    const int a = actions[static_cast<size_t>(i)];
    if (a < kFirstMove || a >= kFirstAttack) continue;
    Unit& u = allies_[static_cast<size_t>(i)];
    const int nx = u.x + kDx[a - kFirstMove];
    const int ny = u.y + kDy[a - kFirstMove];
    if (in_bounds(nx, ny) && !occupied(nx, ny)) {
      u.x = nx;
      u.y = ny;
    }
  }

  // Phase 2: enemy decisions from the post-move board.
  struct EnemyPlan {
    int attack_target = -1;  // ally id, or -1
    int move_dx = 0;
    int move_dy = 0;
  };
  std::vector<EnemyPlan> plans(static_cast<size_t>(config_.n_enemies));
  for (int j = 0; j < config_.n_enemies; ++j) {
    Unit& e = enemies_[static_cast<size_t>(j)];
    if (!e.alive()) continue;
    const int target = nearest_living_ally(e);
    if (target < 0) continue;
    const Unit& a = allies_[static_cast<size_t>(target)];
    if (e.cooldown == 0 &&
        dist2(e, a) <= config_.attack_range * config_.attack_range) {
      plans[static_cast<size_t>(j)].attack_target = target;
    } else {
      const int dx = a.x - e.x;
      const int dy = a.y - e.y;
      if (std::abs(dx) >= std::abs(dy) && dx != 0) {
        plans[static_cast<size_t>(j)].move_dx = dx > 0 ? 1 : -1;
      } else if (dy != 0) {
        plans[static_cast<size_t>(j)].move_dy = dy > 0 ? 1 : -1;
      }
    }
  }

  // Phase 3: enemy moves, in id order.
  for (int j = 0; j < config_.n_enemies; ++j) {
    Unit& e = enemies_[static_cast<size_t>(j)];
    const EnemyPlan& plan = plans[static_cast<size_t>(j)];
    if (!e.alive() || (plan.move_dx == 0 && plan.move_dy == 0)) continue;
    const int nx = e.x + plan.move_dx;
    const int ny = e.y + plan.move_dy;
    if (in_bounds(nx, ny) && !occupied(nx, ny)) {
      e.x = nx;
      e.y = ny;
    }
  }

  // Phase 4: ally attacks, in id order. Range is re-checked here: a target
  // that slipped away this step is missed, but the cooldown is spent.
  for (int i = 0; i < config_.n_allies; ++i) {
    const int a = actions[static_cast<size_t>(i)];
    if (a < kFirstAttack) continue;
    Unit& self = allies_[static_cast<size_t>(i)];
    Unit& target = enemies_[static_cast<size_t>(a - kFirstAttack)];
    ally_attacked[static_cast<size_t>(i)] = true;
    self.cooldown = config_.attack_cooldown;
    if (!target.alive() ||
        dist2(self, target) > config_.attack_range * config_.attack_range) {
      continue;
    }
    const int damage = std::min(config_.ally_damage, target.health);
    target.health -= damage;
    raw_reward += damage;
    if (!target.alive()) raw_reward += 10.0;
  }
  bool all_enemies_down = true;
  for (const Unit& e : enemies_) all_enemies_down = all_enemies_down && !e.alive();
  if (all_enemies_down) {
    raw_reward += 200.0;
    won_ = true;
  }

  // Phase 5: enemy attacks (enemies killed above do not fire).
  for (int j = 0; j < config_.n_enemies; ++j) {
    Unit& e = enemies_[static_cast<size_t>(j)];
    const EnemyPlan& plan = plans[static_cast<size_t>(j)];
    if (!e.alive() || plan.attack_target < 0) continue;
    enemy_attacked[static_cast<size_t>(j)] = true;
    e.cooldown = config_.attack_cooldown;
    Unit& target = allies_[static_cast<size_t>(plan.attack_target)];
    if (!target.alive() ||
        dist2(e, target) > config_.attack_range * config_.attack_range) {
      continue;
    }
    target.health -= std::min(config_.enemy_damage, target.health);
  }

  // Phase 6: cooldowns decay for everyone who held fire.
  for (int i = 0; i < config_.n_allies; ++i) {
    Unit& u = allies_[static_cast<size_t>(i)];
    if (!ally_attacked[static_cast<size_t>(i)] && u.cooldown > 0) --u.cooldown;
  }
  for (int j = 0; j < config_.n_enemies; ++j) {
    Unit& e = enemies_[static_cast<size_t>(j)];
    if (!enemy_attacked[static_cast<size_t>(j)] && e.cooldown > 0) --e.cooldown;
  }

  bool all_allies_down = true;
  for (const Unit& a : allies_) all_allies_down = all_allies_down && !a.alive();

  ++t_;
  StepResult result;
  result.reward = raw_reward * reward_scale();
  if (all_enemies_down || all_allies_down) {
    result.terminal = true;
  } else if (t_ >= config_.episode_limit) {
    result.terminal = true;
    result.truncated = true;
  }
  done_ = result.terminal;
  return result;
}

}  // namespace qattenlab
