#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace prd::env {

enum class RewardMode { kIndividual, kShared };

// Global state of a running episode.
//
// `agent_states` holds one row per agent: the per-agent state the centralized
// critics consume. The global state vector is the row-major concatenation.
struct EnvState {
  Eigen::MatrixXd agent_states;
  int t = 0;
  bool done = false;

  Eigen::VectorXd global() const;
};

// One observation row per agent, fixed width per environment.
using JointObservation = Eigen::MatrixXd;

// Discrete action index per agent.
using JointAction = std::vector<int>;

struct RewardVector {
  Eigen::VectorXd individual;
  // Sum of `individual`, accumulated in agent order.
  double shared = 0.0;

  static RewardVector from_individual(Eigen::VectorXd rewards);
};

struct ResetResult {
  EnvState state;
  JointObservation observation;
};

struct StepResult {
  EnvState state;
  JointObservation observation;
  RewardVector reward;
  bool done = false;
  // True when the episode ended by its own termination condition rather than the timestep cap.
  bool terminated = false;
};

// Cooperative Markov game with per-agent reward streams.
//
// Single-owner state machine: reset() starts an episode, step() advances it.
// Stepping after `done` throws UsageError.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int num_agents() const = 0;
  virtual int observation_dim() const = 0;
  virtual int state_dim() const = 0;
  virtual int num_actions() const = 0;
  virtual int max_timesteps() const = 0;
  // Team label per agent. Environments without teams return all zeros.
  virtual std::vector<int> team_ids() const = 0;

  virtual ResetResult reset(std::uint64_t seed) = 0;
  virtual StepResult step(const JointAction& action) = 0;

  virtual EnvState state() const = 0;
  virtual JointObservation observation() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

}  // namespace prd::env
