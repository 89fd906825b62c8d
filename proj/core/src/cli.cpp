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

#include "qattenlab/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qattenlab/attention_export.hpp"
#include "qattenlab/checkpoint.hpp"
#include "qattenlab/env.hpp"
#include "qattenlab/error.hpp"
#include "qattenlab/metrics.hpp"
#include "qattenlab/run_config.hpp"
#include "qattenlab/theory.hpp"
#include "qattenlab/trainer.hpp"

namespace qattenlab {
namespace {

std::string checkpoint_path(const RunConfig& rc) {
  return (std::filesystem::path(rc.out_dir) / "checkpoint.bin").string();
}

std::string metrics_path(const RunConfig& rc) {
  return (std::filesystem::path(rc.out_dir) / "metrics.csv").string();
}

int cmd_train(const std::string& config_path, const std::string& resume_path) {
  const RunConfig rc = parse_run_config(config_path);
  Trainer trainer(rc.train, load_env(rc.env_path));
  trainer.init();

  long long last_metric_step = -1;
  MetricsLog log = [&] {
    if (resume_path.empty()) return MetricsLog::create(metrics_path(rc));
    trainer.restore(load_checkpoint(resume_path));
    return MetricsLog::open_for_resume(metrics_path(rc), trainer.env_steps(),
                                       &last_metric_step);
  }();

  Trainer::Hooks hooks;
  hooks.on_eval = [&log](const EvalRow& row) { log.append(row); };
  hooks.on_checkpoint = [&](long long) {
    save_checkpoint(checkpoint_path(rc),
                    trainer.make_checkpoint(rc.checkpoint_buffer));
  };
  trainer.run(hooks, rc.checkpoint_interval, last_metric_step);
  save_checkpoint(checkpoint_path(rc),
                  trainer.make_checkpoint(rc.checkpoint_buffer));

  if (rc.export_attention) {
    if (trainer.mixer() == nullptr) {
      throw ConfigError("attention export: the run has no mixer");
    }
    export_attention(trainer.net(), trainer.params(), *trainer.mixer(),
                     trainer.env(), 1, derive_seed(rc.train.seed, 5),
                     rc.out_dir);
  }
  std::printf("trained %lld env steps (%lld episodes, %lld updates)\n",
              trainer.env_steps(), trainer.episodes_done(),
              trainer.train_steps());
  std::printf("metrics: %s\ncheckpoint: %s\n", log.path().c_str(),
              checkpoint_path(rc).c_str());
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path) {
  const RunConfig rc = parse_run_config(config_path);
  Trainer trainer(rc.train, load_env(rc.env_path));
  trainer.init();
  trainer.restore(load_checkpoint(ckpt_path));
  const EvalStats stats = trainer.evaluate();
  std::printf("median_return=%.12g mean_return=%.12g win_rate=%.12g\n",
              stats.median_return, stats.mean_return, stats.win_rate);
  return 0;
}

int cmd_verify_theory(uint64_t suite_seed, const std::string& out_path) {
  const TheoryReport report = run_theory_suite(suite_seed);
  const std::string json = report.to_json();
  if (out_path.empty()) {
    std::printf("%s\n", json.c_str());
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw IoError("verify-theory: cannot open " + out_path);
    out << json << '\n';
    out.flush();
    if (!out) throw IoError("verify-theory: write to " + out_path + " failed");
    std::printf("report: %s (all_pass=%s)\n", out_path.c_str(),
                report.all_pass ? "true" : "false");
  }
  return report.all_pass ? 0 : 1;
}

int cmd_export_attention(const std::string& ckpt_path,
                         const std::string& config_path, int episodes,
                         uint64_t seed) {
  const RunConfig rc = parse_run_config(config_path);
  Trainer trainer(rc.train, load_env(rc.env_path));
  trainer.init();
  trainer.restore(load_checkpoint(ckpt_path));
  if (trainer.mixer() == nullptr) {
    throw ConfigError("attention export: the run has no mixer");
  }
  const std::vector<std::string> files =
      export_attention(trainer.net(), trainer.params(), *trainer.mixer(),
                       trainer.env(), episodes, seed, rc.out_dir);
  for (const std::string& f : files) std::printf("%s\n", f.c_str());
  return 0;
}

int cmd_oracle(const std::string& env_path, double gamma) {
  const std::unique_ptr<Env> env = load_env(env_path);
  const OracleResult result = env->oracle_optimal(gamma);
  std::printf("%.12g\n", result.value);
  for (const std::vector<int>& stage : result.policy) {
    std::string line;
    for (size_t i = 0; i < stage.size(); ++i) {
      if (i) line += ' ';
      line += std::to_string(stage[static_cast<size_t>(i)]);
    }
    std::printf("%s\n", line.c_str());
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Attention-based value-decomposition laboratory"};
  app.require_subcommand(1);

  std::string train_config, train_resume;
  CLI::App* train = app.add_subcommand("train", "Train per a run config");
  train->add_option("config", train_config, "Run config JSON")->required();
  train->add_option("--resume", train_resume, "Checkpoint to resume from");

  std::string eval_ckpt, eval_config;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("config", eval_config, "Run config JSON")->required();

  uint64_t suite_seed = 1;
  std::string report_out;
  CLI::App* verify =
      app.add_subcommand("verify-theory", "Run the synthetic check suite");
  verify->add_option("--suite-seed", suite_seed, "Suite seed");
  verify->add_option("--out", report_out, "Write the JSON report here");

  std::string export_ckpt, export_config;
  int export_episodes = 1;
  uint64_t export_seed = 1;
  CLI::App* exporter = app.add_subcommand(
      "export-attention", "Write per-step attention records to CSV");
  exporter->add_option("checkpoint", export_ckpt, "Checkpoint file")->required();
  exporter->add_option("config", export_config, "Run config JSON")->required();
  exporter->add_option("--episodes", export_episodes, "Greedy episodes");
  exporter->add_option("--seed", export_seed, "Episode seed");

  std::string oracle_env;
  double oracle_gamma = 0.99;
  CLI::App* oracle =
      app.add_subcommand("oracle", "Print the optimal return of a small game");
  oracle->add_option("env", oracle_env, "Environment JSON")->required();
  oracle->add_option("--gamma", oracle_gamma, "Discount factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed()) return cmd_train(train_config, train_resume);
    if (eval->parsed()) return cmd_eval(eval_ckpt, eval_config);
    if (verify->parsed()) return cmd_verify_theory(suite_seed, report_out);
    if (exporter->parsed()) {
      return cmd_export_attention(export_ckpt, export_config, export_episodes,
                                  export_seed);
    }
    if (oracle->parsed()) return cmd_oracle(oracle_env, oracle_gamma);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "%s\n", app.help().c_str());
  return 2;
}

}  // namespace qattenlab
