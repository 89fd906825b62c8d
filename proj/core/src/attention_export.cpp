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

#include "qattenlab/attention_export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "qattenlab/error.hpp"
#include "qattenlab/tape.hpp"

namespace qattenlab {

std::vector<std::string> export_attention(const AgentNet& net,
                                          const ParamStore& params,
                                          const Mixer& mixer, Env& env,
                                          int episodes, uint64_t seed,
                                          const std::string& out_dir) {
  if (episodes < 1) {
    throw ContractError("attention export: episodes must be >= 1");
  }
  const EnvInfo info = env.info();
  const int n = info.n_agents;
  const int hidden_dim = net.config().hidden;
  std::vector<std::string> written;

  for (int e = 0; e < episodes; ++e) {
    env.reset(derive_seed(seed, 0, static_cast<uint64_t>(e)));
    std::vector<int> last_actions(static_cast<size_t>(n), -1);
    Array hidden = Array::zeros({n, hidden_dim});

    struct StepRecord {
      MixRecord mix;
    };
    std::vector<StepRecord> records;

    while (true) {
      const Array state = env.state();
      Array feats = Array::zeros({n, info.obs_dim});
      Array x = Array::zeros({n, net.input_dim()});
      std::vector<std::vector<uint8_t>> masks(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        const Array o = env.obs(i);
        for (int c = 0; c < info.obs_dim; ++c) feats.at(i, c) = o[c];
        masks[static_cast<size_t>(i)] = env.action_mask(i);
        const Array xi = net.make_input(o, last_actions[static_cast<size_t>(i)], i);
        for (int c = 0; c < net.input_dim(); ++c) x.at(i, c) = xi[c];
      }

      Tape t;
      const AgentNet::ForwardOut out = net.forward(
          t, params, t.constant(std::move(x)), t.constant(hidden));
      const Array& q = t.val(out.q);
      hidden = t.val(out.hidden);

      std::vector<int> actions(static_cast<size_t>(n));
      Array chosen_q = Array::zeros({1, n});
      for (int i = 0; i < n; ++i) {
        Array q_row = Array::zeros({1, info.n_actions});
        for (int a = 0; a < info.n_actions; ++a) q_row[a] = q.at(i, a);
        actions[static_cast<size_t>(i)] =
            greedy_action(q_row, masks[static_cast<size_t>(i)]);
        chosen_q.at(0, i) = q.at(i, actions[static_cast<size_t>(i)]);
      }

      const std::optional<MixRecord> record =
          mixer.inspect(params, state, feats, chosen_q);
      if (!record) {
        throw ConfigError("attention export: mixer '" + mixer.kind() +
                          "' exposes no attention records");
      }
      records.push_back({*record});

      const StepResult result = env.step(actions);
      last_actions = actions;
      if (result.terminal) break;
    }

    const std::string path =
        (std::filesystem::path(out_dir) /
         ("attention_ep" + std::to_string(e) + ".csv"))
            .string();
    std::ofstream csv(path, std::ios::trunc);
    if (!csv) throw IoError("attention export: cannot open " + path);
    char buf[128];

    csv << "step,head,agent,lambda\n";
    for (size_t s = 0; s < records.size(); ++s) {
      const Array& lambda = records[s].mix.lambda;
      for (int h = 0; h < lambda.rows(); ++h) {
        for (int i = 0; i < lambda.cols(); ++i) {
          std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.12g\n", s, h, i,
                        lambda.at(h, i));
          csv << buf;
        }
      }
    }
    csv << "step,head,w\n";
    for (size_t s = 0; s < records.size(); ++s) {
      const Array& scale = records[s].mix.head_scale;
      for (int h = 0; h < scale.cols(); ++h) {
        std::snprintf(buf, sizeof(buf), "%zu,%d,%.12g\n", s, h, scale.at(0, h));
        csv << buf;
      }
    }
    csv << "step,c\n";
    for (size_t s = 0; s < records.size(); ++s) {
      std::snprintf(buf, sizeof(buf), "%zu,%.12g\n", s, records[s].mix.baseline);
      csv << buf;
    }
    csv.flush();
    if (!csv) throw IoError("attention export: write to " + path + " failed");
    written.push_back(path);
  }
  return written;
}

}  // namespace qattenlab
