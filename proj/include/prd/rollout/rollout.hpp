#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "prd/env/factory.hpp"
#include "prd/nets/model.hpp"

namespace prd::rollout {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One environment step of one episode. Hidden states are the inputs to this
// step (the recurrent state before it). Values are in the original scale.
struct Transition {
  int t = 0;
  Matrix observation;         // M x obs_dim
  Matrix state;               // M x state_dim
  std::vector<int> actions;   // M
  Vector log_probs;           // M, behavior policy
  Vector rewards;             // M, individual
  double shared_reward = 0.0;
  Vector q_values;            // M (empty when Q was not evaluated)
  Vector v_values;            // M
  Matrix attention;           // M x M from the Q critic, diagonal 1 (empty when not evaluated)
  bool done = false;
  Matrix actor_hidden;
  Matrix q_hidden;
  Matrix v_hidden;
};

struct Trajectory {
  std::vector<Transition> steps;
  // True when the episode ended by its termination condition (not the cap).
  bool terminated = false;
  // V_i(s_T, a_T^{-i}) after the final step: a sampled-action bootstrap on
  // truncation, zeros on termination.
  Vector bootstrap_v;
  // Q_i(s_T, a_T) under the same sampled actions (empty when Q was not evaluated).
  Vector bootstrap_q;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(steps.size()); }
  // Sum of individual rewards over agents and time.
  double team_return() const;
};

struct CollectOptions {
  int batch_size = 1;
  bool evaluate_q = true;
  bool evaluate_v = true;
  // Pick the most probable action instead of sampling.
  bool greedy = false;
  // First episode index; episode e uses seed derive_seed(seed, first_episode + e).
  std::uint64_t first_episode = 0;
};

// Runs batch_size episodes in lockstep (one network call per step for all
// live episodes) and records full trajectories. Environment failures are
// rethrown with the episode index.
std::vector<Trajectory> collect(const env::EnvFactory& factory, nets::Model& model,
                                const CollectOptions& options, std::uint64_t seed);

// (start, length) pairs of consecutive chunks of at most L steps.
std::vector<std::pair<int, int>> chunk(int length, int chunk_length);

// One JSON object per transition: t, state, actions, rewards.
std::string to_jsonl(const Trajectory& trajectory);
void dump_jsonl(const std::filesystem::path& path, const std::vector<Trajectory>& trajectories);

}  // namespace prd::rollout
