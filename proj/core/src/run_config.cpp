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

#include "qattenlab/run_config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& key,
                       const std::string& reason) {
  throw ConfigError("run config " + path + ": key '" + key + "': " + reason);
}

double number_at(const json& doc, const std::string& path,
                 const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) fail(path, key, "expected a number");
  return doc[key].get<double>();
}

long long integer_at(const json& doc, const std::string& path,
                     const std::string& key, long long fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number_integer()) fail(path, key, "expected an integer");
  return doc[key].get<long long>();
}

bool flag_at(const json& doc, const std::string& path, const std::string& key,
             bool fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_boolean()) fail(path, key, "expected true or false");
  return doc[key].get<bool>();
}

std::string string_at(const json& doc, const std::string& path,
                      const std::string& key, const std::string& fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_string()) fail(path, key, "expected a string");
  return doc[key].get<std::string>();
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("run config " + path + ": cannot open file");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("run config " + path + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("run config " + path + ": top level must be an object");
  }

  static const std::set<std::string> known = {
      "env",           "mixer",          "total_steps",
      "gamma",         "batch_size",     "buffer_capacity",
      "epsilon_start", "epsilon_end",    "anneal_steps",
      "target_update_episodes",          "eval_interval",
      "eval_episodes", "seed",           "share_agent_params",
      "learning_rate", "rms_smoothing",  "rms_epsilon",
      "grad_clip",     "out_dir",        "checkpoint_interval",
      "export_attention",                "checkpoint_buffer"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) fail(path, key, "unknown key");
  }
  if (!doc.contains("env")) fail(path, "env", "required");

  RunConfig rc;
  rc.env_path = string_at(doc, path, "env", "");
  if (!std::filesystem::exists(rc.env_path)) {
    fail(path, "env", "environment file '" + rc.env_path + "' does not exist");
  }
  TrainConfig& tc = rc.train;
  tc.mixer = string_at(doc, path, "mixer", tc.mixer);
  static const std::set<std::string> mixers = {
      "attention", "attention_weighted", "attention_nonlinear",
      "vdn",       "hypernet",           "iql"};
  if (!mixers.count(tc.mixer)) fail(path, "mixer", "unknown mixer '" + tc.mixer + "'");
  tc.total_steps = integer_at(doc, path, "total_steps", 100000);
  tc.gamma = number_at(doc, path, "gamma", tc.gamma);
  tc.batch_size = static_cast<int>(integer_at(doc, path, "batch_size", tc.batch_size));
  tc.buffer_capacity =
      static_cast<int>(integer_at(doc, path, "buffer_capacity", tc.buffer_capacity));
  tc.epsilon_start = number_at(doc, path, "epsilon_start", tc.epsilon_start);
  tc.epsilon_end = number_at(doc, path, "epsilon_end", tc.epsilon_end);
  tc.anneal_steps = integer_at(doc, path, "anneal_steps", tc.anneal_steps);
  tc.target_update_episodes = static_cast<int>(
      integer_at(doc, path, "target_update_episodes", tc.target_update_episodes));
  tc.eval_interval = integer_at(doc, path, "eval_interval", tc.eval_interval);
  tc.eval_episodes =
      static_cast<int>(integer_at(doc, path, "eval_episodes", tc.eval_episodes));
  {
    const long long seed = integer_at(doc, path, "seed",
                                      static_cast<long long>(tc.seed));
    if (seed < 0) fail(path, "seed", "must be non-negative");
    tc.seed = static_cast<uint64_t>(seed);
  }
  tc.share_agent_params =
      flag_at(doc, path, "share_agent_params", tc.share_agent_params);
  tc.optimizer.learning_rate =
      number_at(doc, path, "learning_rate", tc.optimizer.learning_rate);
  tc.optimizer.smoothing =
      number_at(doc, path, "rms_smoothing", tc.optimizer.smoothing);
  tc.optimizer.epsilon =
      number_at(doc, path, "rms_epsilon", tc.optimizer.epsilon);
  tc.grad_clip = number_at(doc, path, "grad_clip", tc.grad_clip);

  rc.out_dir = string_at(doc, path, "out_dir", rc.out_dir);
  if (const char* root = std::getenv("QATTEN_LAB_OUT");
      root != nullptr && root[0] != '\0' &&
      std::filesystem::path(rc.out_dir).is_relative()) {
    rc.out_dir = (std::filesystem::path(root) / rc.out_dir).string();
  }
  rc.checkpoint_interval =
      integer_at(doc, path, "checkpoint_interval", rc.checkpoint_interval);
  if (rc.checkpoint_interval < 0) {
    fail(path, "checkpoint_interval", "must be non-negative");
  }
  rc.export_attention =
      flag_at(doc, path, "export_attention", rc.export_attention);
  rc.checkpoint_buffer =
      flag_at(doc, path, "checkpoint_buffer", rc.checkpoint_buffer);

  try {
    tc.validate_and_finalize();
  } catch (const ConfigError& e) {
    throw ConfigError("run config " + path + ": " + e.what());
  }

  std::error_code ec;
  std::filesystem::create_directories(rc.out_dir, ec);
  if (ec || !std::filesystem::is_directory(rc.out_dir)) {
    fail(path, "out_dir",
         "cannot create output directory '" + rc.out_dir + "'");
  }
  return rc;
}

}  // namespace qattenlab
