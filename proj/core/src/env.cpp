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

#include "qattenlab/env.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "qattenlab/error.hpp"
#include "qattenlab/matrix_game.hpp"
#include "qattenlab/skirmish.hpp"
#include "qattenlab/two_step_game.hpp"

namespace qattenlab {

OracleResult Env::oracle_optimal(double) const {
  throw CapacityError(
      "oracle: this environment's joint state-action space exceeds the "
      "enumeration budget");
}

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(context + ": unknown field \"" + key + "\"");
    }
  }
}

const json& require(const json& j, const std::string& key,
                    const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(context + ": missing field \"" + key + "\"");
  }
  return *it;
}

int require_int(const json& j, const std::string& key,
                const std::string& context) {
  const json& v = require(j, key, context);
  if (!v.is_number_integer()) {
    throw ConfigError(context + ": field \"" + key + "\" must be an integer");
  }
  return v.get<int>();
}

int optional_int(const json& j, const std::string& key, int fallback,
                 const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) {
    throw ConfigError(context + ": field \"" + key + "\" must be an integer");
  }
  return it->get<int>();
}

// Flattens a payoff tensor given as nested arrays, validating that the
// nesting matches the declared action counts at every level.
void flatten_payoff(const json& node, const std::vector<int>& actions,
                    size_t depth, std::vector<double>& out,
                    const std::string& context) {
  if (depth == actions.size()) {
    if (!node.is_number()) {
      throw ConfigError(context + ": payoff entries must be numbers");
    }
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array() ||
      node.size() != static_cast<size_t>(actions[depth])) {
    throw ConfigError(context + ": payoff nesting at depth " +
                      std::to_string(depth) + " must be an array of length " +
                      std::to_string(actions[depth]));
  }
  for (const json& child : node) {
    flatten_payoff(child, actions, depth + 1, out, context);
  }
}

// Shared {agents, actions} header of the matrix and two-step formats. The
// declared agent count must equal the length of the action-count list.
std::vector<int> parse_actions(const json& j, const std::string& context) {
  const int agents = require_int(j, "agents", context);
  const json& actions_j = require(j, "actions", context);
  if (!actions_j.is_array() || actions_j.empty()) {
    throw ConfigError(context + ": \"actions\" must be a non-empty array");
  }
  if (agents != static_cast<int>(actions_j.size())) {
    throw ConfigError(context + ": " + std::to_string(agents) +
                      " agents declared but " +
                      std::to_string(actions_j.size()) + " action counts given");
  }
  std::vector<int> actions;
  for (const json& a : actions_j) {
    if (!a.is_number_integer() || a.get<int>() <= 0) {
      throw ConfigError(context + ": action counts must be positive integers");
    }
    actions.push_back(a.get<int>());
  }
  return actions;
}

std::unique_ptr<Env> make_matrix(const json& j) {
  const std::string context = "matrix game";
  check_keys(j, {"agents", "actions", "payoff"}, context);
  std::vector<int> actions = parse_actions(j, context);
  std::vector<double> payoff;
  flatten_payoff(require(j, "payoff", context), actions, 0, payoff, context);
  return std::make_unique<MatrixGame>(std::move(actions), std::move(payoff));
}

std::unique_ptr<Env> make_two_step(const json& j) {
  const std::string context = "two-step game";
  check_keys(j, {"agents", "actions", "modes", "branch_agent", "gamma"},
             context);
  std::vector<int> actions = parse_actions(j, context);

  const json& modes = require(j, "modes", context);
  if (!modes.is_object()) {
    throw ConfigError(context + ": \"modes\" must be an object with A and B");
  }
  check_keys(modes, {"A", "B"}, context + ".modes");
  std::vector<double> payoff_a;
  std::vector<double> payoff_b;
  flatten_payoff(require(modes, "A", context + ".modes"), actions, 0, payoff_a,
                 context + ".modes.A");
  flatten_payoff(require(modes, "B", context + ".modes"), actions, 0, payoff_b,
                 context + ".modes.B");

  const int branch_agent = require_int(j, "branch_agent", context);
  const json& gamma_j = require(j, "gamma", context);
  if (!gamma_j.is_number()) {
    throw ConfigError(context + ": \"gamma\" must be a number");
  }
  return std::make_unique<TwoStepGame>(std::move(actions), std::move(payoff_a),
                                       std::move(payoff_b), branch_agent,
                                       gamma_j.get<double>());
}

std::unique_ptr<Env> make_skirmish(const json& j) {
  const std::string context = "skirmish";
  check_keys(j, {"grid", "allies", "enemies", "sight", "shoot", "limit",
                 "seed_policy"},
             context);
  SkirmishConfig c;

  const json& grid = require(j, "grid", context);
  if (!grid.is_array() || grid.size() != 2 || !grid[0].is_number_integer() ||
      !grid[1].is_number_integer()) {
    throw ConfigError(context + ": \"grid\" must be [width, height]");
  }
  c.width = grid[0].get<int>();
  c.height = grid[1].get<int>();
  c.n_allies = require_int(j, "allies", context);
  c.n_enemies = require_int(j, "enemies", context);
  c.sight_range = require_int(j, "sight", context);
  c.attack_range = require_int(j, "shoot", context);
  c.episode_limit = optional_int(j, "limit", c.episode_limit, context);

  auto policy_it = j.find("seed_policy");
  if (policy_it != j.end()) {
    if (!policy_it->is_string()) {
      throw ConfigError(context + ": \"seed_policy\" must be a string");
    }
    const std::string policy = policy_it->get<std::string>();
    if (policy == "spawn_random") {
      c.fixed_spawn = false;
    } else if (policy == "spawn_fixed") {
      c.fixed_spawn = true;
    } else {
      throw ConfigError(context + ": seed_policy \"" + policy +
                        "\" is not one of spawn_random, spawn_fixed");
    }
  }
  return std::make_unique<SkirmishEnv>(c);
}

}  // namespace

std::unique_ptr<Env> make_env_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("environment JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("environment JSON: not an object");
  // The game family is identified by its signature field: a one-shot payoff
  // tensor, a pair of mode tensors, or a grid.
  if (j.contains("payoff")) return make_matrix(j);
  if (j.contains("modes")) return make_two_step(j);
  if (j.contains("grid")) return make_skirmish(j);
  throw ConfigError(
      "environment: expected one of \"payoff\" (matrix game), \"modes\" "
      "(two-step game), or \"grid\" (skirmish)");
}

std::unique_ptr<Env> load_env(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open environment file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return make_env_from_json(buf.str());
}

}  // namespace qattenlab
