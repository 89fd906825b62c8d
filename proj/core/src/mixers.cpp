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

#include "qattenlab/mixers.hpp"

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

void check_mix_shapes(const Tape& t, NodeId agent_q, NodeId state,
                      NodeId agent_feats, int n_agents, int state_dim,
                      int feat_dim, bool wants_feats) {
  const Array& q = t.val(agent_q);
  if (q.cols() != n_agents) {
    throw ShapeError("mix: utilities " + shape_str(q.shape) + " for " +
                     std::to_string(n_agents) + " agents");
  }
  if (!q.all_finite()) throw NumericError("mix: non-finite agent utilities");
  if (state_dim > 0) {
    const Array& s = t.val(state);
    if (s.cols() != state_dim || s.rows() != q.rows()) {
      throw ShapeError("mix: state " + shape_str(s.shape) +
                       " does not match utilities " + shape_str(q.shape) +
                       " and state width " + std::to_string(state_dim));
    }
    if (!s.all_finite()) throw NumericError("mix: non-finite state");
  }
  if (wants_feats) {
    const Array& f = t.val(agent_feats);
    if (f.cols() != feat_dim || f.rows() != q.rows() * n_agents) {
      throw ShapeError("mix: agent features " + shape_str(f.shape) +
                       ", expected (" + std::to_string(q.rows() * n_agents) +
                       ", " + std::to_string(feat_dim) + ")");
    }
    if (!f.all_finite()) throw NumericError("mix: non-finite agent features");
  }
}

NodeId two_layer(Tape& t, const ParamStore& store, const std::string& prefix,
                 NodeId x) {
  NodeId h = t.relu(t.add_bias(t.matmul(x, t.param(store, prefix + "1.w")),
                               t.param(store, prefix + "1.b")));
  return t.add_bias(t.matmul(h, t.param(store, prefix + "2.w")),
                    t.param(store, prefix + "2.b"));
}

}  // namespace

std::optional<MixRecord> Mixer::inspect(const ParamStore&, const Array&,
                                        const Array&, const Array&) const {
  return std::nullopt;
}

AttentionMixer::AttentionMixer(AttentionMixerConfig config, std::string prefix)
    : config_(config), prefix_(std::move(prefix)) {
  if (config_.n_agents <= 0 || config_.state_dim <= 0 || config_.feat_dim <= 0 ||
      config_.heads <= 0 || config_.embed_dim <= 0) {
    throw ContractError("AttentionMixer: all dimensions must be positive");
  }
}

std::string AttentionMixer::kind() const {
  if (config_.append_agent_q) return "attention_nonlinear";
  if (config_.weighted_heads) return "attention_weighted";
  return "attention";
}

void AttentionMixer::register_params(ParamStore& store, Rng& rng) const {
  const int key_in = config_.feat_dim + (config_.append_agent_q ? 1 : 0);
  for (int h = 0; h < config_.heads; ++h) {
    const std::string head = prefix_ + ".h" + std::to_string(h);
    add_linear(store, rng, head + ".query1", config_.state_dim,
               config_.query_hidden);
    add_linear(store, rng, head + ".query2", config_.query_hidden,
               config_.embed_dim);
    // Key embedding is a pure linear map so each attention score is a
    // bilinear form in (agent features, state embedding).
    store.add(head + ".key.w", init_weight(rng, key_in, config_.embed_dim));
  }
  add_linear(store, rng, prefix_ + ".value1", config_.state_dim,
             config_.baseline_hidden);
  add_linear(store, rng, prefix_ + ".value2", config_.baseline_hidden, 1);
  if (config_.weighted_heads) {
    add_linear(store, rng, prefix_ + ".headw1", config_.state_dim,
               config_.head_weight_hidden);
    add_linear(store, rng, prefix_ + ".headw2", config_.head_weight_hidden,
               config_.heads);
  }
}

AttentionMixer::Attention AttentionMixer::attention(Tape& t,
                                                    const ParamStore& store,
                                                    NodeId state,
                                                    NodeId agent_feats,
                                                    NodeId agent_q) const {
  const int n = config_.n_agents;
  NodeId feats = agent_feats;
  if (config_.append_agent_q) {
    NodeId q_col = t.reshape(agent_q, {t.val(agent_q).rows() * n, 1});
    feats = t.concat_cols(agent_feats, q_col);
  }

  std::vector<NodeId> lambdas;
  lambdas.reserve(static_cast<size_t>(config_.heads));
  for (int h = 0; h < config_.heads; ++h) {
    const std::string head = prefix_ + ".h" + std::to_string(h);
    NodeId query = two_layer(t, store, head + ".query", state);
    NodeId keys = t.matmul(feats, t.param(store, head + ".key.w"));
    NodeId logits = t.row_dot_group(keys, query, n);
    lambdas.push_back(t.softmax_rows(logits));
  }
  NodeId lambda_all = lambdas[0];
  for (size_t h = 1; h < lambdas.size(); ++h) {
    lambda_all = t.concat_cols(lambda_all, lambdas[h]);
  }

  NodeId head_scale = -1;
  if (config_.weighted_heads) {
    head_scale = t.abs(two_layer(t, store, prefix_ + ".headw", state));
  }
  NodeId baseline = two_layer(t, store, prefix_ + ".value", state);
  return {lambda_all, head_scale, baseline};
}

NodeId AttentionMixer::mix(Tape& t, const ParamStore& store, NodeId agent_q,
                           NodeId state, NodeId agent_feats) const {
  check_mix_shapes(t, agent_q, state, agent_feats, config_.n_agents,
                   config_.state_dim, config_.feat_dim, /*wants_feats=*/true);
  const int n = config_.n_agents;
  Attention att = attention(t, store, state, agent_feats, agent_q);

  NodeId head_q = -1;  // (R, H): one attended utility sum per head
  for (int h = 0; h < config_.heads; ++h) {
    NodeId lam = t.slice_cols(att.lambda_all, h * n, (h + 1) * n);
    NodeId hq = t.sum_rows(t.mul(lam, agent_q));
    head_q = h == 0 ? hq : t.concat_cols(head_q, hq);
  }
  NodeId mixed = config_.weighted_heads
                     ? t.sum_rows(t.mul(att.head_scale, head_q))
                     : t.sum_rows(head_q);
  return t.add(mixed, att.baseline);
}

std::optional<MixRecord> AttentionMixer::inspect(const ParamStore& store,
                                                 const Array& state,
                                                 const Array& agent_feats,
                                                 const Array& agent_q) const {
  const int n = config_.n_agents;
  Tape t;
  NodeId s = t.constant(state);
  NodeId f = t.constant(agent_feats);
  NodeId q = t.constant(agent_q);
  check_mix_shapes(t, q, s, f, n, config_.state_dim, config_.feat_dim, true);
  if (t.val(q).rows() != 1) {
    throw ContractError("inspect expects a single state row");
  }
  Attention att = attention(t, store, s, f, q);

  MixRecord record;
  record.lambda = Array::zeros({config_.heads, n});
  const Array& lam = t.val(att.lambda_all);
  for (int h = 0; h < config_.heads; ++h) {
    for (int i = 0; i < n; ++i) record.lambda.at(h, i) = lam[h * n + i];
  }
  record.head_scale = config_.weighted_heads
                          ? t.val(att.head_scale)
                          : Array::full({1, config_.heads}, 1.0);
  record.baseline = t.val(att.baseline)[0];
  record.head_q = Array::zeros({1, config_.heads});
  record.q_tot = record.baseline;
  for (int h = 0; h < config_.heads; ++h) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += record.lambda.at(h, i) * agent_q[i];
    record.head_q[h] = sum;
    record.q_tot += record.head_scale[h] * sum;
  }
  return record;
}

NodeId SumMixer::mix(Tape& t, const ParamStore&, NodeId agent_q, NodeId state,
                     NodeId) const {
  check_mix_shapes(t, agent_q, state, -1, n_agents_, 0, 0, false);
  return t.sum_rows(agent_q);
}

HypernetMixer::HypernetMixer(HypernetMixerConfig config, std::string prefix)
    : config_(config), prefix_(std::move(prefix)) {
  if (config_.n_agents <= 0 || config_.state_dim <= 0 ||
      config_.mixing_embed <= 0) {
    throw ContractError("HypernetMixer: all dimensions must be positive");
  }
}

void HypernetMixer::register_params(ParamStore& store, Rng& rng) const {
  const int n = config_.n_agents;
  const int e = config_.mixing_embed;
  add_linear(store, rng, prefix_ + ".hyper_w1", config_.state_dim, n * e);
  add_linear(store, rng, prefix_ + ".hyper_b1", config_.state_dim, e);
  add_linear(store, rng, prefix_ + ".hyper_w2", config_.state_dim, e);
  add_linear(store, rng, prefix_ + ".value1", config_.state_dim,
             config_.value_hidden);
  add_linear(store, rng, prefix_ + ".value2", config_.value_hidden, 1);
}

NodeId HypernetMixer::mix(Tape& t, const ParamStore& store, NodeId agent_q,
                          NodeId state, NodeId) const {
  check_mix_shapes(t, agent_q, state, -1, config_.n_agents, config_.state_dim,
                   0, false);
  const int n = config_.n_agents;
  const int e = config_.mixing_embed;

  NodeId w1 = t.abs(
      t.add_bias(t.matmul(state, t.param(store, prefix_ + ".hyper_w1.w")),
                 t.param(store, prefix_ + ".hyper_w1.b")));  // (R, N*E)
  NodeId b1 = t.add_bias(t.matmul(state, t.param(store, prefix_ + ".hyper_b1.w")),
                         t.param(store, prefix_ + ".hyper_b1.b"));  // (R, E)

  // hidden = relu(sum_i q_i * W1[i,:] + b1), assembled per agent since the
  // mixing weights differ per row.
  NodeId hidden = -1;
  for (int i = 0; i < n; ++i) {
    NodeId qi = t.slice_cols(agent_q, i, i + 1);
    NodeId wi = t.slice_cols(w1, i * e, (i + 1) * e);
    NodeId term = t.bcast_col_mul(qi, wi);
    hidden = i == 0 ? term : t.add(hidden, term);
  }
  hidden = t.relu(t.add(hidden, b1));

  NodeId w2 = t.abs(
      t.add_bias(t.matmul(state, t.param(store, prefix_ + ".hyper_w2.w")),
                 t.param(store, prefix_ + ".hyper_w2.b")));  // (R, E)
  NodeId value = two_layer(t, store, prefix_ + ".value", state);
  return t.add(t.sum_rows(t.mul(hidden, w2)), value);
}

FixedLinearMixer::FixedLinearMixer(Array coefs, double offset)
    : coefs_(std::move(coefs)), offset_(offset) {
  if (coefs_.rows() != 1 || coefs_.cols() < 1) {
    throw ContractError("FixedLinearMixer: coefficients must be a (1, N) row");
  }
}

NodeId FixedLinearMixer::mix(Tape& t, const ParamStore&, NodeId agent_q,
                             NodeId state, NodeId) const {
  check_mix_shapes(t, agent_q, state, -1, coefs_.cols(), 0, 0, false);
  Array coef_col = Array::zeros({coefs_.cols(), 1});
  for (int i = 0; i < coefs_.cols(); ++i) coef_col.at(i, 0) = coefs_[i];
  NodeId weighted = t.matmul(agent_q, t.constant(std::move(coef_col)));
  return t.add_bias(weighted, t.constant(Array::scalar(offset_)));
}

std::unique_ptr<Mixer> make_mixer(const std::string& kind, int n_agents,
                                  int state_dim, int feat_dim) {
  AttentionMixerConfig att;
  att.n_agents = n_agents;
  att.state_dim = state_dim;
  att.feat_dim = feat_dim;
  if (kind == "attention") {
    return std::make_unique<AttentionMixer>(att);
  }
  if (kind == "attention_weighted") {
    att.weighted_heads = true;
    return std::make_unique<AttentionMixer>(att);
  }
  if (kind == "attention_nonlinear") {
    // The utility-aware keys build on the weighted-head variant.
    att.weighted_heads = true;
    att.append_agent_q = true;
    return std::make_unique<AttentionMixer>(att);
  }
  if (kind == "vdn") return std::make_unique<SumMixer>(n_agents);
  if (kind == "hypernet") {
    HypernetMixerConfig hyper;
    hyper.n_agents = n_agents;
    hyper.state_dim = state_dim;
    return std::make_unique<HypernetMixer>(hyper);
  }
  throw ConfigError("unknown mixer kind: " + kind);
}

MixProbe probe_mixer(const Mixer& mixer, const ParamStore& store,
                     const Array& state, const Array& agent_feats,
                     const Array& agent_q, double h) {
  const int n = mixer.n_agents();
  if (agent_q.rows() != 1 || agent_q.cols() != n) {
    throw ContractError("probe_mixer expects a single (1, N) utility row");
  }
  if (!(h > 0.0)) throw ContractError("probe_mixer: step must be positive");

  // Rows 2i / 2i+1 carry q + h*e_i / q - h*e_i; the state and feature rows
  // are tiled to match so one mix() call evaluates every perturbation.
  const int rows = 2 * n;
  Array q_block = Array::zeros({rows, n});
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < n; ++j) q_block.at(r, j) = agent_q[j];
    q_block.at(r, r / 2) += (r % 2 == 0) ? h : -h;
  }
  Array s_block = Array::zeros({rows, state.cols()});
  for (int r = 0; r < rows; ++r) {
    for (int j = 0; j < state.cols(); ++j) s_block.at(r, j) = state.at(0, j);
  }
  Array f_block = Array::zeros({rows * agent_feats.rows(), agent_feats.cols()});
  for (int r = 0; r < rows; ++r) {
    for (int i = 0; i < agent_feats.rows(); ++i) {
      for (int j = 0; j < agent_feats.cols(); ++j) {
        f_block.at(r * agent_feats.rows() + i, j) = agent_feats.at(i, j);
      }
    }
  }

  Tape t;
  NodeId out = mixer.mix(t, store, t.constant(std::move(q_block)),
                         t.constant(std::move(s_block)),
                         t.constant(std::move(f_block)));
  const Array& y = t.val(out);
  MixProbe probe;
  probe.dq = Array::zeros({1, n});
  for (int i = 0; i < n; ++i) {
    probe.dq[i] = (y.at(2 * i, 0) - y.at(2 * i + 1, 0)) / (2.0 * h);
  }
  probe.record = mixer.inspect(store, state, agent_feats, agent_q);
  return probe;
}

}  // namespace qattenlab
