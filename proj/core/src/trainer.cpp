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

#include "qattenlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qattenlab/error.hpp"

namespace qattenlab {
namespace {

// Episodes of a batch packed time-major: at each timestep t the episodes
// still running form a prefix of the (length-descending) episode order, so
// every per-step block is a contiguous row range. State row (t, b) sits at
// index srow[t] + b; the N agent rows of that state are consecutive at
// (srow[t] + b) * N + i.
struct Packed {
  std::vector<const Episode*> eps;  // sorted by real length, descending
  std::vector<int> len;             // real lengths, same order
  int n_agents = 0;
  int max_len = 0;                  // T
  std::vector<int> alive;           // per t: episodes with len > t
  std::vector<int> srow;            // per t: first state row of step t
  int rows = 0;                     // total state rows R

  Array inputs;       // (R*N, input_dim) agent net inputs
  Array feats;        // (R*N, obs_dim) observation rows for the mixer
  Array states;       // (R, state_dim)
  std::vector<int> actions;          // (R*N) chosen action per agent row
  std::vector<uint8_t> masks;        // (R*N*A) allowed flags per agent row
  std::vector<double> rewards;       // (R)
  std::vector<uint8_t> done;         // (R) terminal flags
};

Packed pack_batch(const std::vector<const Episode*>& batch, const AgentNet& net) {
  if (batch.empty()) throw ContractError("td_loss: empty batch");
  const AgentNetConfig& cfg = net.config();
  const int n = cfg.n_agents;
  const int n_actions = cfg.n_actions;

  Packed p;
  p.n_agents = n;
  p.eps = batch;
  // Length-descending, stable in draw order: deterministic packing.
  std::stable_sort(p.eps.begin(), p.eps.end(),
                   [](const Episode* a, const Episode* b) {
                     return a->length() > b->length();
                   });
  p.len.reserve(p.eps.size());
  for (const Episode* e : p.eps) p.len.push_back(e->length());
  p.max_len = p.len.front();

  p.alive.resize(static_cast<size_t>(p.max_len));
  p.srow.resize(static_cast<size_t>(p.max_len));
  for (int t = 0; t < p.max_len; ++t) {
    int alive = 0;
    for (int b = 0; b < static_cast<int>(p.eps.size()); ++b) {
      if (p.len[static_cast<size_t>(b)] > t) ++alive;
    }
    p.alive[static_cast<size_t>(t)] = alive;
    p.srow[static_cast<size_t>(t)] =
        t == 0 ? 0 : p.srow[static_cast<size_t>(t - 1)] +
                         p.alive[static_cast<size_t>(t - 1)];
  }
  p.rows = p.srow.back() + p.alive.back();

  const int obs_dim = cfg.obs_dim;
  p.inputs = Array::zeros({p.rows * n, net.input_dim()});
  p.feats = Array::zeros({p.rows * n, obs_dim});
  p.actions.resize(static_cast<size_t>(p.rows) * static_cast<size_t>(n));
  p.masks.resize(static_cast<size_t>(p.rows) * static_cast<size_t>(n) *
                 static_cast<size_t>(n_actions));
  p.rewards.resize(static_cast<size_t>(p.rows));
  p.done.resize(static_cast<size_t>(p.rows));
  int state_dim = 0;

  for (int t = 0; t < p.max_len; ++t) {
    for (int b = 0; b < p.alive[static_cast<size_t>(t)]; ++b) {
      const EpisodeStep& step = p.eps[static_cast<size_t>(b)]->steps[static_cast<size_t>(t)];
      const int srow = p.srow[static_cast<size_t>(t)] + b;
      if (state_dim == 0) {
        state_dim = step.state.cols();
        p.states = Array::zeros({p.rows, state_dim});
      }
      for (int c = 0; c < state_dim; ++c) {
        p.states.at(srow, c) = step.state.at(0, c);
      }
      p.rewards[static_cast<size_t>(srow)] = step.reward;
      p.done[static_cast<size_t>(srow)] = step.terminal ? 1 : 0;
      for (int i = 0; i < n; ++i) {
        const int arow = srow * n + i;
        Array obs_row = Array::zeros({1, obs_dim});
        for (int c = 0; c < obs_dim; ++c) {
          obs_row[c] = step.obs.at(i, c);
          p.feats.at(arow, c) = step.obs.at(i, c);
        }
        const Array input =
            net.make_input(obs_row, step.last_actions[static_cast<size_t>(i)], i);
        for (int c = 0; c < net.input_dim(); ++c) {
          p.inputs.at(arow, c) = input[c];
        }
        p.actions[static_cast<size_t>(arow)] = step.actions[static_cast<size_t>(i)];
        for (int a = 0; a < n_actions; ++a) {
          p.masks[static_cast<size_t>(arow) * static_cast<size_t>(n_actions) +
                  static_cast<size_t>(a)] =
              step.masks[static_cast<size_t>(i) * static_cast<size_t>(n_actions) +
                         static_cast<size_t>(a)];
        }
      }
    }
  }
  return p;
}

// Extracts the rows of one agent from the interleaved (R*N, c) layout into
// a contiguous (R, c) block, used on the private-parameters path.
Array agent_rows(const Array& all, int rows, int n_agents, int agent) {
  Array out = Array::zeros({rows, all.cols()});
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < all.cols(); ++c) {
      out.at(r, c) = all.at(r * n_agents + agent, c);
    }
  }
  return out;
}

// Runs the packed recurrence for one parameter set over inputs whose step-t
// block is the alive[t]*members consecutive rows starting at
// srow[t]*members. Returns per-row action utilities (same layout).
NodeId packed_utilities(Tape& t, const ParamStore& store, const AgentNet& net,
                        const Packed& p, NodeId x_all, int members, int agent) {
  NodeId xg_all = net.input_gates(t, store, x_all, agent);
  const int hidden = net.config().hidden;
  std::vector<NodeId> hs;
  hs.reserve(static_cast<size_t>(p.max_len));
  NodeId h_prev = t.constant(
      Array::zeros({p.alive[0] * members, hidden}));
  for (int step = 0; step < p.max_len; ++step) {
    const int rows = p.alive[static_cast<size_t>(step)] * members;
    if (step > 0 && t.val(h_prev).rows() != rows) {
      h_prev = t.slice_rows(h_prev, 0, rows);
    }
    const int off = p.srow[static_cast<size_t>(step)] * members;
    NodeId xg = t.slice_rows(xg_all, off, off + rows);
    h_prev = net.recurrent_step(t, store, xg, h_prev, agent).hidden;
    hs.push_back(h_prev);
  }
  NodeId h_all = hs.size() == 1 ? hs[0] : t.stack_rows(hs);
  return net.utilities(t, store, h_all, agent);
}

// Chosen-action utilities as one (R, N) block, built lazily per agent when
// parameters are private and in one pass when they are shared.
NodeId packed_chosen_q(Tape& t, const ParamStore& store, const AgentNet& net,
                       const Packed& p, NodeId* utilities_out) {
  const int n = p.n_agents;
  if (net.config().share_params) {
    NodeId x = t.constant(p.inputs);
    NodeId q_all = packed_utilities(t, store, net, p, x, n, -1);
    if (utilities_out) *utilities_out = q_all;
    NodeId chosen = t.gather_cols(q_all, p.actions);
    return t.reshape(chosen, {p.rows, n});
  }
  NodeId agent_q = -1;
  for (int i = 0; i < n; ++i) {
    NodeId x = t.constant(agent_rows(p.inputs, p.rows, n, i));
    NodeId q_i = packed_utilities(t, store, net, p, x, 1, i);
    std::vector<int> act(static_cast<size_t>(p.rows));
    for (int r = 0; r < p.rows; ++r) {
      act[static_cast<size_t>(r)] =
          p.actions[static_cast<size_t>(r) * static_cast<size_t>(n) +
                    static_cast<size_t>(i)];
    }
    NodeId chosen = t.gather_cols(q_i, std::move(act));
    agent_q = i == 0 ? chosen : t.concat_cols(agent_q, chosen);
  }
  if (utilities_out) *utilities_out = -1;
  return agent_q;
}

// Value-only target pass: per-agent greedy-masked maxima at every step, as
// an (R, N) array, computed with frozen target parameters on a private tape.
Array target_greedy_values(const AgentNet& net, const ParamStore& target,
                           const Packed& p) {
  Tape t;
  const int n = p.n_agents;
  const int n_actions = net.config().n_actions;
  Array q_all = Array::zeros({p.rows * n, n_actions});
  if (net.config().share_params) {
    NodeId x = t.constant(p.inputs);
    q_all = t.val(packed_utilities(t, target, net, p, x, n, -1));
  } else {
    for (int i = 0; i < n; ++i) {
      NodeId x = t.constant(agent_rows(p.inputs, p.rows, n, i));
      const Array q_i = t.val(packed_utilities(t, target, net, p, x, 1, i));
      for (int r = 0; r < p.rows; ++r) {
        for (int a = 0; a < n_actions; ++a) {
          q_all.at(r * n + i, a) = q_i.at(r, a);
        }
      }
    }
  }

  Array best = Array::zeros({p.rows, n});
  for (int r = 0; r < p.rows; ++r) {
    for (int i = 0; i < n; ++i) {
      const int arow = r * n + i;
      double v = 0.0;
      bool any = false;
      for (int a = 0; a < n_actions; ++a) {
        if (!p.masks[static_cast<size_t>(arow) * static_cast<size_t>(n_actions) +
                     static_cast<size_t>(a)]) {
          continue;
        }
        const double q = q_all.at(arow, a);
        if (!any || q > v) {
          v = q;
          any = true;
        }
      }
      if (!any) throw ContractError("td_loss: a step has no allowed action");
      best.at(r, i) = v;
    }
  }
  return best;
}

}  // namespace

void TrainConfig::validate_and_finalize() {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("train config: gamma must lie in (0, 1]");
  }
  if (total_steps < 0) throw ConfigError("train config: negative total steps");
  if (batch_size < 1) throw ConfigError("train config: batch size must be >= 1");
  if (buffer_capacity < batch_size) {
    throw ConfigError("train config: buffer smaller than one batch");
  }
  if (!(epsilon_start >= epsilon_end && epsilon_end >= 0.0 &&
        epsilon_start <= 1.0)) {
    throw ConfigError("train config: epsilon schedule must fall within [0,1]");
  }
  if (anneal_steps < 0) {
    anneal_steps = std::min<long long>(50000, total_steps / 4);
  }
  if (anneal_steps > total_steps) {
    throw ConfigError("train config: anneal window exceeds total steps");
  }
  if (target_update_episodes < 1) {
    throw ConfigError("train config: target update cadence must be >= 1");
  }
  if (eval_interval < 1) throw ConfigError("train config: eval interval must be >= 1");
  if (eval_episodes < 1) throw ConfigError("train config: eval episodes must be >= 1");
  if (grad_clip <= 0.0) throw ConfigError("train config: gradient clip must be > 0");
}

Episode collect_episode(const AgentNet& net, const ParamStore& params,
                        Env& env, uint64_t env_seed,
                        const std::function<double(long long)>& epsilon_at,
                        long long env_steps_base, Rng& explore_rng) {
  env.reset(env_seed);
  const EnvInfo info = env.info();
  const int n = info.n_agents;
  const int hidden_dim = net.config().hidden;

  Episode ep;
  std::vector<int> last_actions(static_cast<size_t>(n), -1);
  std::vector<Array> hidden(static_cast<size_t>(n));
  for (Array& h : hidden) h = Array::zeros({1, hidden_dim});

  for (long long t = 0;; ++t) {
    EpisodeStep step;
    step.obs = Array::zeros({n, info.obs_dim});
    step.masks.resize(static_cast<size_t>(n) * static_cast<size_t>(info.n_actions));
    step.last_actions = last_actions;
    step.state = env.state();
    for (int i = 0; i < n; ++i) {
      const Array o = env.obs(i);
      for (int c = 0; c < info.obs_dim; ++c) step.obs.at(i, c) = o[c];
      const std::vector<uint8_t> mask = env.action_mask(i);
      std::copy(mask.begin(), mask.end(),
                step.masks.begin() + static_cast<long>(i) * info.n_actions);
    }

    const double eps = epsilon_at(env_steps_base + t);
    std::vector<int> actions(static_cast<size_t>(n));
    if (net.config().share_params) {
      Tape t2;
      Array x = Array::zeros({n, net.input_dim()});
      Array h_block = Array::zeros({n, hidden_dim});
      for (int i = 0; i < n; ++i) {
        Array obs_row = Array::zeros({1, info.obs_dim});
        for (int c = 0; c < info.obs_dim; ++c) obs_row[c] = step.obs.at(i, c);
        const Array xi = net.make_input(obs_row, last_actions[static_cast<size_t>(i)], i);
        for (int c = 0; c < net.input_dim(); ++c) x.at(i, c) = xi[c];
        for (int c = 0; c < hidden_dim; ++c) h_block.at(i, c) = hidden[static_cast<size_t>(i)][c];
      }
      const AgentNet::ForwardOut out = net.forward(
          t2, params, t2.constant(std::move(x)), t2.constant(std::move(h_block)));
      const Array& q = t2.val(out.q);
      const Array& h_next = t2.val(out.hidden);
      for (int i = 0; i < n; ++i) {
        std::vector<uint8_t> mask(step.masks.begin() + static_cast<long>(i) * info.n_actions,
                                  step.masks.begin() + static_cast<long>(i + 1) * info.n_actions);
        Array q_row = Array::zeros({1, info.n_actions});
        for (int a = 0; a < info.n_actions; ++a) q_row[a] = q.at(i, a);
        actions[static_cast<size_t>(i)] = select_action(q_row, mask, eps, explore_rng);
        for (int c = 0; c < hidden_dim; ++c) hidden[static_cast<size_t>(i)][c] = h_next.at(i, c);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        Tape t2;
        Array obs_row = Array::zeros({1, info.obs_dim});
        for (int c = 0; c < info.obs_dim; ++c) obs_row[c] = step.obs.at(i, c);
        const Array xi = net.make_input(obs_row, last_actions[static_cast<size_t>(i)], i);
        const AgentNet::ForwardOut out = net.forward(
            t2, params, t2.constant(xi), t2.constant(hidden[static_cast<size_t>(i)]), i);
        std::vector<uint8_t> mask(step.masks.begin() + static_cast<long>(i) * info.n_actions,
                                  step.masks.begin() + static_cast<long>(i + 1) * info.n_actions);
        actions[static_cast<size_t>(i)] = select_action(t2.val(out.q), mask, eps, explore_rng);
        hidden[static_cast<size_t>(i)] = t2.val(out.hidden);
      }
    }

    const StepResult result = env.step(actions);
    step.actions = actions;
    step.reward = result.reward;
    step.terminal = result.terminal;
    step.truncated = result.truncated;
    ep.steps.push_back(std::move(step));
    last_actions = actions;
    if (result.terminal) break;
  }
  return ep;
}

NodeId td_loss(Tape& tape, const std::vector<const Episode*>& batch,
               const AgentNet& net, const ParamStore& online,
               const Mixer* mixer, const ParamStore& target, double gamma) {
  const Packed p = pack_batch(batch, net);
  const int n = p.n_agents;

  // Frozen target side first: per-agent greedy maxima, then the target
  // mixer, all as plain values.
  const Array target_best = target_greedy_values(net, target, p);
  Array y;
  if (mixer != nullptr) {
    Tape tt;
    NodeId tot = mixer->mix(tt, target, tt.constant(target_best),
                            tt.constant(p.states), tt.constant(p.feats));
    const Array& q_tot_next = tt.val(tot);
    y = Array::zeros({p.rows, 1});
    for (int t = 0; t < p.max_len; ++t) {
      for (int b = 0; b < p.alive[static_cast<size_t>(t)]; ++b) {
        const int r = p.srow[static_cast<size_t>(t)] + b;
        double bootstrap = 0.0;
        if (!p.done[static_cast<size_t>(r)]) {
          const int r_next = p.srow[static_cast<size_t>(t + 1)] + b;
          bootstrap = gamma * q_tot_next.at(r_next, 0);
        }
        y.at(r, 0) = p.rewards[static_cast<size_t>(r)] + bootstrap;
      }
    }
  } else {
    // Independent learners: each agent bootstraps its own greedy maximum.
    y = Array::zeros({p.rows * n, 1});
    for (int t = 0; t < p.max_len; ++t) {
      for (int b = 0; b < p.alive[static_cast<size_t>(t)]; ++b) {
        const int r = p.srow[static_cast<size_t>(t)] + b;
        for (int i = 0; i < n; ++i) {
          double bootstrap = 0.0;
          if (!p.done[static_cast<size_t>(r)]) {
            const int r_next = p.srow[static_cast<size_t>(t + 1)] + b;
            bootstrap = gamma * target_best.at(r_next, i);
          }
          y.at(r * n + i, 0) = p.rewards[static_cast<size_t>(r)] + bootstrap;
        }
      }
    }
  }

  // Differentiable online side.
  NodeId agent_q = packed_chosen_q(tape, online, net, p, nullptr);
  NodeId predicted;
  if (mixer != nullptr) {
    predicted = mixer->mix(tape, online, agent_q, tape.constant(p.states),
                           tape.constant(p.feats));
  } else {
    predicted = tape.reshape(agent_q, {p.rows * n, 1});
  }
  NodeId diff = tape.sub(predicted, tape.constant(std::move(y)));
  return tape.mean_all(tape.mul(diff, diff));
}

Trainer::Trainer(TrainConfig config, std::unique_ptr<Env> env)
    : config_(std::move(config)),
      env_(std::move(env)),
      opt_(config_.optimizer),
      buffer_(1) {
  config_.validate_and_finalize();
  if (!env_) throw ContractError("trainer: null environment");
  buffer_ = ReplayBuffer(config_.buffer_capacity);

  const EnvInfo info = env_->info();
  AgentNetConfig net_cfg;
  net_cfg.obs_dim = info.obs_dim;
  net_cfg.n_agents = info.n_agents;
  net_cfg.n_actions = info.n_actions;
  net_cfg.share_params = config_.share_agent_params;
  net_ = std::make_unique<AgentNet>(net_cfg);
  if (config_.mixer != "iql") {
    mixer_ = make_mixer(config_.mixer, info.n_agents, info.state_dim,
                        info.obs_dim);
  }
}

void Trainer::init() {
  params_ = ParamStore();
  target_params_ = ParamStore();
  Rng init_rng(derive_seed(config_.seed, 0, 0));
  net_->register_params(params_, init_rng);
  if (mixer_) mixer_->register_params(params_, init_rng);
  Rng target_rng(derive_seed(config_.seed, 0, 0));
  net_->register_params(target_params_, target_rng);
  if (mixer_) mixer_->register_params(target_params_, target_rng);
  target_params_.copy_values_from(params_);
  opt_ = RmsProp(config_.optimizer);
  episodes_done_ = 0;
  env_steps_ = 0;
  train_steps_ = 0;
  last_loss_ = 0.0;
}

double Trainer::epsilon_at(long long env_steps) const {
  if (config_.anneal_steps <= 0) return config_.epsilon_end;
  const double frac = std::min(
      1.0, static_cast<double>(env_steps) / static_cast<double>(config_.anneal_steps));
  return config_.epsilon_start +
         frac * (config_.epsilon_end - config_.epsilon_start);
}

void Trainer::train_once() {
  Rng sample_rng(derive_seed(config_.seed, 3, static_cast<uint64_t>(train_steps_)));
  const std::vector<const Episode*> batch =
      buffer_.sample(config_.batch_size, sample_rng);
  Tape tape;
  NodeId loss = td_loss(tape, batch, *net_, params_, mixer_.get(),
                        target_params_, config_.gamma);
  const double value = tape.val(loss)[0];
  if (!std::isfinite(value)) throw NumericError("training loss is not finite");
  params_.zero_grads();
  tape.backward(loss, &params_);
  params_.clip_grads(config_.grad_clip);
  opt_.step(params_);
  last_loss_ = value;
  ++train_steps_;
}

EvalStats Trainer::evaluate() {
  std::vector<double> returns;
  returns.reserve(static_cast<size_t>(config_.eval_episodes));
  int wins = 0;
  Rng unused(0);
  const auto greedy = [](long long) { return 0.0; };
  for (int e = 0; e < config_.eval_episodes; ++e) {
    const Episode ep =
        collect_episode(*net_, params_, *env_,
                        derive_seed(config_.seed, 4, static_cast<uint64_t>(e)),
                        greedy, 0, unused);
    returns.push_back(ep.total_reward());
    if (env_->won()) ++wins;
  }
  std::sort(returns.begin(), returns.end());
  const size_t m = returns.size();
  EvalStats stats;
  stats.median_return = m % 2 == 1
                            ? returns[m / 2]
                            : 0.5 * (returns[m / 2 - 1] + returns[m / 2]);
  stats.mean_return =
      std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(m);
  stats.win_rate = static_cast<double>(wins) / static_cast<double>(m);
  return stats;
}

EvalRow Trainer::current_eval_row() {
  const EvalStats stats = evaluate();
  EvalRow row;
  row.step = env_steps_;
  row.median_return = stats.median_return;
  row.mean_return = stats.mean_return;
  row.win_rate = stats.win_rate;
  row.loss = last_loss_;
  row.epsilon = epsilon_at(env_steps_);
  return row;
}

void Trainer::run(const Hooks& hooks, long long checkpoint_interval,
                  long long last_metric_step) {
  const auto crossed = [](long long prev, long long now, long long interval) {
    return interval > 0 && prev / interval < now / interval;
  };

  if (env_steps_ == 0 && episodes_done_ == 0 && last_metric_step < 0) {
    if (hooks.on_eval) hooks.on_eval(current_eval_row());
    last_metric_step = 0;
  }

  const auto eps_fn = [this](long long step) { return epsilon_at(step); };
  while (env_steps_ < config_.total_steps) {
    Rng explore_rng(
        derive_seed(config_.seed, 2, static_cast<uint64_t>(episodes_done_)));
    Episode ep = collect_episode(
        *net_, params_, *env_,
        derive_seed(config_.seed, 1, static_cast<uint64_t>(episodes_done_)),
        eps_fn, env_steps_, explore_rng);
    const long long prev = env_steps_;
    env_steps_ += ep.length();
    buffer_.add(std::move(ep));
    ++episodes_done_;

    if (buffer_.size() >= config_.batch_size) train_once();
    if (episodes_done_ % config_.target_update_episodes == 0) {
      target_params_.copy_values_from(params_);
    }
    if (crossed(prev, env_steps_, config_.eval_interval)) {
      if (hooks.on_eval) hooks.on_eval(current_eval_row());
      last_metric_step = env_steps_;
    }
    if (crossed(prev, env_steps_, checkpoint_interval)) {
      if (hooks.on_checkpoint) hooks.on_checkpoint(env_steps_);
    }
  }

  // A closing row so the log always reflects the final parameters, unless
  // the last interval crossing already landed exactly here.
  if (last_metric_step < env_steps_ && hooks.on_eval) {
    hooks.on_eval(current_eval_row());
  }
}

Checkpoint Trainer::make_checkpoint(bool include_buffer) const {
  Checkpoint ckpt;
  for (const std::string& name : params_.names()) {
    ckpt.arrays["online/" + name] = params_.value(name);
  }
  for (const std::string& name : target_params_.names()) {
    ckpt.arrays["target/" + name] = target_params_.value(name);
  }
  for (const auto& [name, v] : opt_.second_moments()) {
    ckpt.arrays["opt/" + name] = v;
  }
  ckpt.counters["episodes_done"] = static_cast<uint64_t>(episodes_done_);
  ckpt.counters["env_steps"] = static_cast<uint64_t>(env_steps_);
  ckpt.counters["train_steps"] = static_cast<uint64_t>(train_steps_);
  ckpt.counters["seed"] = config_.seed;
  ckpt.scalars["last_loss"] = last_loss_;
  ckpt.text["mixer"] = config_.mixer;
  if (include_buffer) {
    ckpt.has_buffer = true;
    ckpt.buffer.assign(buffer_.episodes().begin(), buffer_.episodes().end());
  }
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  const auto text_it = ckpt.text.find("mixer");
  if (text_it == ckpt.text.end() || text_it->second != config_.mixer) {
    throw ConfigError("checkpoint was trained with a different mixer");
  }
  const auto seed_it = ckpt.counters.find("seed");
  if (seed_it == ckpt.counters.end() || seed_it->second != config_.seed) {
    throw ConfigError("checkpoint was trained with a different seed");
  }
  init();
  const auto load_into = [&](const std::string& prefix, ParamStore& store) {
    for (const std::string& name : store.names()) {
      const auto it = ckpt.arrays.find(prefix + name);
      if (it == ckpt.arrays.end()) {
        throw ConfigError("checkpoint is missing parameter " + prefix + name);
      }
      Array& dst = store.value_mut(name);
      if (!dst.same_shape(it->second)) {
        throw ConfigError("checkpoint parameter " + prefix + name +
                          " has mismatched shape");
      }
      dst = it->second;
    }
  };
  load_into("online/", params_);
  load_into("target/", target_params_);
  for (const auto& [name, v] : ckpt.arrays) {
    if (name.rfind("opt/", 0) == 0) {
      opt_.set_second_moment(name.substr(4), v);
    }
  }
  episodes_done_ = static_cast<long long>(ckpt.counters.at("episodes_done"));
  env_steps_ = static_cast<long long>(ckpt.counters.at("env_steps"));
  train_steps_ = static_cast<long long>(ckpt.counters.at("train_steps"));
  last_loss_ = ckpt.scalars.at("last_loss");
  if (ckpt.has_buffer) {
    buffer_.restore(ckpt.buffer);
  }
}

}  // namespace qattenlab
