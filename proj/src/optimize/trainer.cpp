#include "prd/optimize/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prd/common/errors.hpp"
#include "prd/common/random.hpp"

namespace prd::optimize {

using advantage::EpisodeTargets;
using rollout::Trajectory;

Matrix credit_rewards(const Trajectory& trajectory, const AlgoConfig& config) {
  const int steps = trajectory.length();
  if (steps == 0) return Matrix(0, 0);
  const Eigen::Index m = trajectory.steps.front().rewards.size();
  Matrix rewards(steps, m);
  for (int t = 0; t < steps; ++t) {
    const auto& s = trajectory.steps[static_cast<std::size_t>(t)];
    if (config.credit.strategy == credit::Strategy::kShared) {
      if (s.attention.size() == 0) throw ContractError("shared credit needs recorded attention");
      rewards.row(t) = credit::shared_decompose(s.attention, s.shared_reward).transpose();
    } else if (config.shared_reward) {
      if (config.credit.strategy != credit::Strategy::kNone) {
        throw ConfigError("shared-reward environments support only the mappo and prd-shared variants");
      }
      rewards.row(t).setConstant(s.shared_reward / static_cast<double>(m));
    } else {
      rewards.row(t) = s.rewards.transpose();
    }
  }
  return rewards;
}

PreparedBatch prepare_batch(const std::vector<Trajectory>& trajectories, const AlgoConfig& config,
                            long long update_index) {
  PreparedBatch out;
  out.epsilon = credit::epsilon_at(config.credit, update_index);
  for (const auto& traj : trajectories) {
    const int steps = traj.length();
    Matrix rewards = credit_rewards(traj, config);
    const Eigen::Index m = traj.bootstrap_v.size();
    Matrix values(steps, m);
    for (int t = 0; t < steps; ++t) values.row(t) = traj.steps[static_cast<std::size_t>(t)].v_values.transpose();
    if (config.credit.strategy == credit::Strategy::kNone) {
      out.targets.push_back(advantage::episode_targets_group(rewards, values, traj.bootstrap_v, config.gamma,
                                                             config.lambda));
    } else {
      std::vector<Matrix> omegas;
      omegas.reserve(static_cast<std::size_t>(steps));
      for (const auto& s : traj.steps) {
        if (s.attention.size() == 0) throw ContractError("relevance weights need recorded attention");
        omegas.push_back(credit::relevance(config.credit, s.attention, update_index));
      }
      out.targets.push_back(
          advantage::episode_targets(rewards, omegas, values, traj.bootstrap_v, config.gamma, config.lambda));
    }
    if (traj.bootstrap_q.size() == m) {
      Matrix q_values(steps, m);
      for (int t = 0; t < steps; ++t) q_values.row(t) = traj.steps[static_cast<std::size_t>(t)].q_values.transpose();
      out.q_targets.push_back(
          advantage::lambda_returns(rewards, q_values, traj.bootstrap_q, config.gamma, config.lambda));
      const Matrix group_rewards = rewards.rowwise().sum();
      const Matrix group_values = q_values.rowwise().mean();
      const Eigen::VectorXd group_boot = Eigen::VectorXd::Constant(1, traj.bootstrap_q.mean());
      out.q_group_targets.push_back(
          advantage::lambda_returns(group_rewards, group_values, group_boot, config.gamma, config.lambda));
    }
    out.rewards.push_back(std::move(rewards));
  }
  if (!out.q_targets.empty() && out.q_targets.size() != trajectories.size()) {
    throw ContractError("prepare_batch: Q values recorded for only part of the buffer");
  }
  if (config.normalize_advantages) advantage::normalize_per_agent(out.targets);
  return out;
}

std::vector<ChunkRef> make_chunks(const std::vector<Trajectory>& trajectories, int chunk_length) {
  std::vector<ChunkRef> out;
  for (std::size_t e = 0; e < trajectories.size(); ++e) {
    for (auto [start, length] : rollout::chunk(trajectories[e].length(), chunk_length)) {
      out.push_back({static_cast<int>(e), start, length});
    }
  }
  return out;
}

ReplayBatch build_replay(const std::vector<Trajectory>& trajectories, const PreparedBatch& prepared,
                         const std::vector<ChunkRef>& chunks, int chunk_length, const nets::Model& model,
                         bool shared_q) {
  if (chunks.empty()) throw ContractError("build_replay: no chunks");
  const int m = model.config.num_agents;
  const auto c = static_cast<Eigen::Index>(chunks.size());
  const Eigen::Index rows = c * m;
  int steps = 0;
  for (const auto& ch : chunks) steps = std::max(steps, ch.length);
  steps = std::min(steps, chunk_length);

  ReplayBatch batch;
  batch.num_chunks = static_cast<int>(c);
  batch.num_agents = m;
  batch.shared_q = shared_q;
  batch.actor_hidden.resize(rows, model.config.hidden);
  batch.q_hidden.resize(rows, model.config.hidden);
  batch.v_hidden.resize(rows, model.config.hidden);
  for (Eigen::Index k = 0; k < c; ++k) {
    const auto& ch = chunks[static_cast<std::size_t>(k)];
    const auto& first = trajectories[static_cast<std::size_t>(ch.episode)].steps[static_cast<std::size_t>(ch.start)];
    batch.actor_hidden.middleRows(k * m, m) = first.actor_hidden;
    batch.q_hidden.middleRows(k * m, m) = first.q_hidden;
    batch.v_hidden.middleRows(k * m, m) = first.v_hidden;
  }

  const nets::PopArt& q_norm = model.q.popart();
  const nets::PopArt& v_norm = model.v.popart();
  const Eigen::Index obs_dim = model.config.obs_dim;
  const Eigen::Index state_dim = model.config.state_dim;
  for (int s = 0; s < steps; ++s) {
    ReplayStep step;
    step.observation.resize(rows, obs_dim);
    step.state.resize(rows, state_dim);
    step.actions.resize(static_cast<std::size_t>(rows));
    step.old_log_probs.resize(rows, 1);
    step.advantages.resize(rows, 1);
    step.mask.resize(rows, 1);
    const bool has_q = !prepared.q_targets.empty();
    step.q_target.resize(has_q ? (shared_q ? c : rows) : 0, 1);
    step.v_target.resize(rows, 1);
    step.group_mask.resize(c, 1);
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& ch = chunks[static_cast<std::size_t>(k)];
      const bool real = s < ch.length;
      const int t = ch.start + (real ? s : ch.length - 1);
      const auto& traj = trajectories[static_cast<std::size_t>(ch.episode)];
      const auto& tr = traj.steps[static_cast<std::size_t>(t)];
      const EpisodeTargets& tg = prepared.targets[static_cast<std::size_t>(ch.episode)];
      const Eigen::Index base = k * m;
      step.observation.middleRows(base, m) = tr.observation;
      step.state.middleRows(base, m) = tr.state;
      std::copy(tr.actions.begin(), tr.actions.end(), step.actions.begin() + base);
      step.old_log_probs.middleRows(base, m) = tr.log_probs;
      step.advantages.middleRows(base, m) = tg.advantages.row(t).transpose();
      step.mask.middleRows(base, m).setConstant(real ? 1.0 : 0.0);
      step.group_mask(k, 0) = real ? 1.0 : 0.0;
      for (int i = 0; i < m; ++i) step.v_target(base + i, 0) = v_norm.normalize(tg.value_targets(t, i));
      if (has_q && shared_q) {
        step.q_target(k, 0) = q_norm.normalize(prepared.q_group_targets[static_cast<std::size_t>(ch.episode)](t, 0));
      } else if (has_q) {
        const Matrix& qt = prepared.q_targets[static_cast<std::size_t>(ch.episode)];
        for (int i = 0; i < m; ++i) step.q_target(base + i, 0) = q_norm.normalize(qt(t, i));
      }
      if (real) {
        batch.valid_rows += m;
        batch.valid_groups += 1.0;
      }
    }
    batch.steps.push_back(std::move(step));
  }
  return batch;
}

PolicyLossTerms policy_loss(nets::Policy& policy, ad::Tape& tape, const ReplayBatch& batch, double clip,
                            double entropy_coef) {
  if (batch.valid_rows <= 0.0) throw ContractError("policy_loss: empty batch");
  PolicyLossTerms out;
  auto bound = policy.bind(tape);
  ad::Var hidden = tape.constant(batch.actor_hidden);
  const double inv_n = 1.0 / batch.valid_rows;
  for (const ReplayStep& step : batch.steps) {
    nets::Policy::Output pi = policy.step(bound, step.observation, hidden);
    hidden = pi.hidden;
    ad::Var log_prob = ad::pick(pi.log_probs, step.actions);
    ad::Var surrogate = ad::clipped_surrogate(log_prob, step.old_log_probs, step.advantages, clip);
    ad::Var entropy = ad::entropy_rows(pi.log_probs);
    ad::Var term = ad::add(ad::weighted_sum(surrogate, step.mask * (-inv_n)),
                           ad::weighted_sum(entropy, step.mask * (-entropy_coef * inv_n)));
    out.loss = out.loss.valid() ? ad::add(out.loss, term) : term;
    out.surrogate += surrogate.value().cwiseProduct(step.mask).sum() * inv_n;
    out.entropy += entropy.value().cwiseProduct(step.mask).sum() * inv_n;
    out.mean_ratio +=
        (log_prob.value() - step.old_log_probs).array().exp().matrix().cwiseProduct(step.mask).sum() * inv_n;
  }
  return out;
}

ad::Var critic_loss(nets::Critic& critic, ad::Tape& tape, const ReplayBatch& batch, double huber_delta,
                    bool q_targets) {
  const bool grouped = q_targets && batch.shared_q;
  const double count = grouped ? batch.valid_groups : batch.valid_rows;
  if (count <= 0.0) throw ContractError("critic_loss: empty batch");
  auto bound = critic.bind(tape);
  ad::Var hidden = tape.constant(q_targets ? batch.q_hidden : batch.v_hidden);
  ad::Var total;
  for (const ReplayStep& step : batch.steps) {
    nets::Critic::Output out = critic.step(bound, step.state, step.actions, hidden);
    hidden = out.hidden;
    ad::Var term;
    if (grouped) {
      ad::Var pred = ad::group_mean(out.values, batch.num_agents);
      term = ad::weighted_sum(ad::huber(pred, step.q_target, huber_delta), step.group_mask / count);
    } else {
      const Matrix& target = q_targets ? step.q_target : step.v_target;
      term = ad::weighted_sum(ad::huber(out.values, target, huber_delta), step.mask / count);
    }
    total = total.valid() ? ad::add(total, term) : term;
  }
  return total;
}

namespace {

AdamConfig adam_config(const OptimConfig& c, double lr) {
  AdamConfig a;
  a.lr = lr;
  a.eps = c.adam_eps;
  a.weight_decay = c.weight_decay;
  a.max_grad_norm = c.max_grad_norm;
  return a;
}

double scalar(const ad::Var& v) { return v.value()(0, 0); }

void check_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

Trainer::Trainer(nets::Model& model, const OptimConfig& config)
    : model_(&model),
      config_(config),
      policy_opt_(model.policy.params(), adam_config(config, config.policy_lr)),
      q_opt_(model.q.params(), adam_config(config, config.value_lr)),
      v_opt_(model.v.params(), adam_config(config, config.value_lr)) {
  if (config.epochs < 1 || config.num_minibatch < 1 || config.chunk_length < 1) {
    throw ConfigError("epochs, num_minibatch and chunk_length must be >= 1");
  }
  if (!(config.clip > 0.0) || config.entropy_coef < 0.0 || !(config.huber_delta > 0.0)) {
    throw ConfigError("clip and huber delta must be positive, entropy coefficient >= 0");
  }
}

UpdateMetrics Trainer::update(const std::vector<Trajectory>& trajectories, const PreparedBatch& prepared,
                              bool train_q, bool shared_q, std::uint64_t seed) {
  nets::Model& model = *model_;
  UpdateMetrics metrics;
  metrics.epsilon = prepared.epsilon;

  if (train_q && prepared.q_targets.empty()) throw ContractError("update: Q training needs recorded Q values");
  std::vector<double> v_targets;
  std::vector<double> q_targets;
  for (const auto& tg : prepared.targets) {
    for (Eigen::Index t = 0; t < tg.value_targets.rows(); ++t) {
      for (Eigen::Index i = 0; i < tg.value_targets.cols(); ++i) v_targets.push_back(tg.value_targets(t, i));
    }
  }
  if (train_q) {
    for (const Matrix& qt : shared_q ? prepared.q_group_targets : prepared.q_targets) {
      for (Eigen::Index t = 0; t < qt.rows(); ++t) {
        for (Eigen::Index i = 0; i < qt.cols(); ++i) q_targets.push_back(qt(t, i));
      }
    }
  }
  if (v_targets.empty()) throw ContractError("update: empty buffer");
  model.v.update_popart(Eigen::Map<const Matrix>(v_targets.data(), static_cast<Eigen::Index>(v_targets.size()), 1));
  if (train_q) {
    model.q.update_popart(Eigen::Map<const Matrix>(q_targets.data(), static_cast<Eigen::Index>(q_targets.size()), 1));
  }

  std::vector<ChunkRef> chunks = make_chunks(trajectories, config_.chunk_length);
  const int k = std::min<int>(config_.num_minibatch, static_cast<int>(chunks.size()));
  Rng shuffle_rng(derive_seed(seed, "minibatch"));
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    if (k > 1) {
      for (std::size_t i = chunks.size() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(uniform01(shuffle_rng) * static_cast<double>(i + 1));
        std::swap(chunks[i], chunks[std::min(j, i)]);
      }
    }
    EpochMetrics em;
    for (int b = 0; b < k; ++b) {
      const std::size_t lo = chunks.size() * static_cast<std::size_t>(b) / static_cast<std::size_t>(k);
      const std::size_t hi = chunks.size() * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(k);
      std::vector<ChunkRef> part(chunks.begin() + static_cast<std::ptrdiff_t>(lo),
                                 chunks.begin() + static_cast<std::ptrdiff_t>(hi));
      const ReplayBatch batch = build_replay(trajectories, prepared, part, config_.chunk_length, model, shared_q);

      {
        ad::Tape tape;
        PolicyLossTerms pl = policy_loss(model.policy, tape, batch, config_.clip, config_.entropy_coef);
        check_finite(scalar(pl.loss), "policy loss");
        model.policy.params().zero_grad();
        tape.backward(pl.loss);
        em.grad_norm += policy_opt_.step() / k;
        em.policy_loss += scalar(pl.loss) / k;
        em.entropy += pl.entropy / k;
        em.mean_ratio += pl.mean_ratio / k;
      }
      {
        ad::Tape tape;
        ad::Var vl = critic_loss(model.v, tape, batch, config_.huber_delta, false);
        check_finite(scalar(vl), "value loss");
        model.v.params().zero_grad();
        tape.backward(vl);
        v_opt_.step();
        em.value_loss += scalar(vl) / k;
      }
      if (train_q) {
        ad::Tape tape;
        ad::Var ql = critic_loss(model.q, tape, batch, config_.huber_delta, true);
        check_finite(scalar(ql), "q loss");
        model.q.params().zero_grad();
        tape.backward(ql);
        q_opt_.step();
        em.q_loss += scalar(ql) / k;
      }
    }
    metrics.epochs.push_back(em);
  }
  return metrics;
}

}  // namespace prd::optimize
