#pragma once

#include <cstdint>
#include <vector>

#include "prd/advantage/advantage.hpp"
#include "prd/credit/credit.hpp"
#include "prd/nets/model.hpp"
#include "prd/optimize/adamw.hpp"
#include "prd/rollout/rollout.hpp"

namespace prd::optimize {

using Matrix = Eigen::MatrixXd;

struct OptimConfig {
  double policy_lr = 5e-4;
  double value_lr = 5e-4;
  double clip = 0.05;
  double entropy_coef = 8e-3;
  int epochs = 5;
  int num_minibatch = 1;
  double huber_delta = 10.0;
  double max_grad_norm = 10.0;
  double adam_eps = 1e-5;
  double weight_decay = 0.0;
  int chunk_length = 10;
};

struct AlgoConfig {
  credit::CreditConfig credit;
  double gamma = 0.99;
  double lambda = 0.95;
  // Only the team reward is observable; per-agent streams come from credit.
  bool shared_reward = false;
  bool normalize_advantages = true;
};

// Advantages and targets of a buffer, with relevance weights frozen from the
// behavior-time attention.
struct PreparedBatch {
  std::vector<advantage::EpisodeTargets> targets;
  // Per episode, T x M rewards the credit pipeline used.
  std::vector<Matrix> rewards;
  // Per episode Q-critic targets: per-agent lambda returns (T x M) and, for
  // a shared critic, the group lambda return of the mean Q (T x 1). Empty
  // when the buffer carries no Q values.
  std::vector<Matrix> q_targets;
  std::vector<Matrix> q_group_targets;
  double epsilon = 0.0;
};

// Per-step rewards the credit pipeline sees for one episode (T x M).
Matrix credit_rewards(const rollout::Trajectory& trajectory, const AlgoConfig& config);

PreparedBatch prepare_batch(const std::vector<rollout::Trajectory>& trajectories, const AlgoConfig& config,
                            long long update_index);

// One padded time step of a replay batch: rows are chunk-major groups of M agents.
struct ReplayStep {
  Matrix observation;
  Matrix state;
  std::vector<int> actions;
  Matrix old_log_probs;  // R x 1
  Matrix advantages;     // R x 1
  Matrix mask;           // R x 1, 1 on real transitions
  Matrix q_target;       // R x 1 normalized (per agent) or G x 1 (shared critic), empty without Q targets
  Matrix v_target;       // R x 1 normalized
  Matrix group_mask;     // G x 1
};

struct ReplayBatch {
  int num_chunks = 0;
  int num_agents = 0;
  Matrix actor_hidden;  // initial hidden states at chunk starts
  Matrix q_hidden;
  Matrix v_hidden;
  std::vector<ReplayStep> steps;
  double valid_rows = 0.0;
  double valid_groups = 0.0;
  bool shared_q = false;
};

struct ChunkRef {
  int episode = 0;
  int start = 0;
  int length = 0;
};

std::vector<ChunkRef> make_chunks(const std::vector<rollout::Trajectory>& trajectories, int chunk_length);

// Gathers the chunks into a padded batch. Targets are normalized with the
// critics' current PopArt statistics.
ReplayBatch build_replay(const std::vector<rollout::Trajectory>& trajectories, const PreparedBatch& prepared,
                         const std::vector<ChunkRef>& chunks, int chunk_length, const nets::Model& model,
                         bool shared_q);

struct PolicyLossTerms {
  ad::Var loss;
  double surrogate = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
};

// -mean clipped surrogate - entropy_coef * mean entropy over real transitions,
// replaying hidden states from the chunk starts.
PolicyLossTerms policy_loss(nets::Policy& policy, ad::Tape& tape, const ReplayBatch& batch, double clip,
                            double entropy_coef);

// Mean Huber loss of the normalized critic outputs against the normalized targets.
ad::Var critic_loss(nets::Critic& critic, ad::Tape& tape, const ReplayBatch& batch, double huber_delta,
                    bool q_targets);

struct EpochMetrics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double q_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double grad_norm = 0.0;
};

struct UpdateMetrics {
  std::vector<EpochMetrics> epochs;
  double epsilon = 0.0;
};

// Owns one optimizer per network and runs the multi-epoch update.
class Trainer {
 public:
  Trainer(nets::Model& model, const OptimConfig& config);

  // PopArt statistics are updated from the batch targets first, then
  // `epochs` passes over num_minibatch chunk minibatches update all three
  // networks. train_q = false leaves the Q critic untouched (MAPPO).
  UpdateMetrics update(const std::vector<rollout::Trajectory>& trajectories, const PreparedBatch& prepared,
                       bool train_q, bool shared_q, std::uint64_t seed);

  const OptimConfig& config() const { return config_; }

 private:
  nets::Model* model_;
  OptimConfig config_;
  AdamW policy_opt_;
  AdamW q_opt_;
  AdamW v_opt_;
};

}  // namespace prd::optimize
