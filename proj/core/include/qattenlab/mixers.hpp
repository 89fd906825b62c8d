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

#ifndef QATTENLAB_MIXERS_HPP_
#define QATTENLAB_MIXERS_HPP_

#include <memory>
#include <optional>
#include <string>

#include "qattenlab/rng.hpp"
#include "qattenlab/tape.hpp"

namespace qattenlab {

// Introspection record for one state: how a mixer combined the agents'
// utilities there.
struct MixRecord {
  Array lambda;      // (heads, n_agents); each row is a probability vector
  Array head_scale;  // (1, heads); non-negative per-head weights
  Array head_q;      // (1, heads); per-head attended utility sums
  double baseline = 0.0;  // state-value offset added to the weighted sum
  double q_tot = 0.0;     // baseline + sum_h head_scale[h] * head_q[h]
};

// A mixer maps the agents' chosen-action utilities plus centralized state
// information to one joint action value. All mix() entry points are batched:
// R rows of (state, utilities) are processed in a single graph.
//
//   agent_q     (R, N)    chosen utility per agent
//   state       (R, S)    centralized state rows
//   agent_feats (R*N, F)  per-agent feature rows, grouped by state row
//                         (row r*N+i holds agent i's features for state r)
//
// Only attention mixers read agent_feats; others may receive an empty array.
class Mixer {
 public:
  virtual ~Mixer() = default;

  virtual std::string kind() const = 0;
  virtual int n_agents() const = 0;
  virtual void register_params(ParamStore& store, Rng& rng) const = 0;
  virtual NodeId mix(Tape& t, const ParamStore& store, NodeId agent_q,
                     NodeId state, NodeId agent_feats) const = 0;

  // Attention introspection for a single state (state (1,S), agent_feats
  // (N,F), agent_q (1,N)). Mixers without attention structure return
  // nullopt.
  virtual std::optional<MixRecord> inspect(const ParamStore& store,
                                           const Array& state,
                                           const Array& agent_feats,
                                           const Array& agent_q) const;
};

// Multi-head attention mixer:
//
//   Q_joint(s, q) = c(s) + sum_h w_h(s) * sum_i lambda_{h,i}(s) * q_i
//
// where for each head h, lambda_{h,:} is a softmax over agents of bilinear
// key/query scores: the query embeds the centralized state through a
// two-layer MLP, the key embeds each agent's features through one linear
// map, and the score is their inner product (no magnitude rescaling).
// c(s) is a two-layer state-value MLP.
//
// Variants:
//   weighted_heads: w_h(s) = |f(s)|_h from a two-layer MLP with absolute-
//     value output, giving each head a state-dependent non-negative scale.
//     Otherwise w_h = 1.
//   append_agent_q: each agent's chosen utility is appended to its feature
//     row before the key embedding, letting the attention react to the
//     utilities themselves. This strengthens the representation but gives
//     up the guarantee that joint values rise with each utility.
struct AttentionMixerConfig {
  int n_agents = 0;
  int state_dim = 0;
  int feat_dim = 0;  // per-agent feature width as passed to mix()
  int heads = 4;
  int embed_dim = 32;        // key/query embedding width
  int query_hidden = 64;     // hidden width of the query MLP
  int baseline_hidden = 32;  // hidden width of the c(s) MLP
  int head_weight_hidden = 64;  // hidden width of the f(s) MLP
  bool weighted_heads = false;
  bool append_agent_q = false;
};

class AttentionMixer : public Mixer {
 public:
  explicit AttentionMixer(AttentionMixerConfig config,
                          std::string prefix = "mix");

  const AttentionMixerConfig& config() const { return config_; }
  std::string kind() const override;
  int n_agents() const override { return config_.n_agents; }
  void register_params(ParamStore& store, Rng& rng) const override;
  NodeId mix(Tape& t, const ParamStore& store, NodeId agent_q, NodeId state,
             NodeId agent_feats) const override;
  std::optional<MixRecord> inspect(const ParamStore& store, const Array& state,
                                   const Array& agent_feats,
                                   const Array& agent_q) const override;

 private:
  struct Attention {
    NodeId lambda_all;   // (R, H*N): per-head attention rows, head-major
    NodeId head_scale;   // (R, H) or -1 when unweighted
    NodeId baseline;     // (R, 1)
  };
  Attention attention(Tape& t, const ParamStore& store, NodeId state,
                      NodeId agent_feats, NodeId agent_q) const;

  AttentionMixerConfig config_;
  std::string prefix_;
};

// Additive mixer: the joint value is the plain sum of utilities.
class SumMixer : public Mixer {
 public:
  explicit SumMixer(int n_agents) : n_agents_(n_agents) {}
  std::string kind() const override { return "vdn"; }
  int n_agents() const override { return n_agents_; }
  void register_params(ParamStore&, Rng&) const override {}
  NodeId mix(Tape& t, const ParamStore& store, NodeId agent_q, NodeId state,
             NodeId agent_feats) const override;

 private:
  int n_agents_;
};

// Monotone hypernetwork mixer: a two-layer mixing network whose weights are
// produced from the state by hypernetworks and forced non-negative with an
// absolute value, plus an unconstrained state-value offset.
//
//   hidden = relu(q * |W1(s)| + b1(s))        (E wide)
//   Q_joint = hidden . |w2(s)| + V(s)
struct HypernetMixerConfig {
  int n_agents = 0;
  int state_dim = 0;
  int mixing_embed = 32;     // E
  int value_hidden = 32;     // hidden width of the V(s) MLP
};

class HypernetMixer : public Mixer {
 public:
  explicit HypernetMixer(HypernetMixerConfig config, std::string prefix = "mix");
  std::string kind() const override { return "qmix"; }
  int n_agents() const override { return config_.n_agents; }
  void register_params(ParamStore& store, Rng& rng) const override;
  NodeId mix(Tape& t, const ParamStore& store, NodeId agent_q, NodeId state,
             NodeId agent_feats) const override;

 private:
  HypernetMixerConfig config_;
  std::string prefix_;
};

// Fixed linear mixer Q_joint = sum_i coef_i * q_i + offset, with constant
// (non-learned) coefficients. Exists as a test control: negative
// coefficients deliberately break the monotone-mixing property that the
// learning mixers maintain.
class FixedLinearMixer : public Mixer {
 public:
  FixedLinearMixer(Array coefs, double offset);
  std::string kind() const override { return "fixed_linear"; }
  int n_agents() const override { return coefs_.size(); }
  void register_params(ParamStore&, Rng&) const override {}
  NodeId mix(Tape& t, const ParamStore& store, NodeId agent_q, NodeId state,
             NodeId agent_feats) const override;

 private:
  Array coefs_;  // (1, N)
  double offset_;
};

// Builds a mixer by kind name: "attention", "attention_weighted",
// "attention_nonlinear", "vdn", or "hypernet". Throws ConfigError for
// unknown kinds. feat_dim is the per-agent feature width the trainer will
// pass to mix(); attention variants that append the utility account for the
// extra column themselves.
std::unique_ptr<Mixer> make_mixer(const std::string& kind, int n_agents,
                                  int state_dim, int feat_dim);

// Sensitivity of the mixed joint value to each agent utility at one point,
// measured by central differences on the utilities with the state and
// feature rows held fixed, together with the mixer's attention record there
// (when it has one). All 2N perturbed evaluations run as one batched graph.
struct MixProbe {
  Array dq;  // (1, N): d(Q_joint)/d(q_i) by central differences
  std::optional<MixRecord> record;
};
MixProbe probe_mixer(const Mixer& mixer, const ParamStore& store,
                     const Array& state, const Array& agent_feats,
                     const Array& agent_q, double h = 1e-4);

}  // namespace qattenlab

#endif  // QATTENLAB_MIXERS_HPP_
