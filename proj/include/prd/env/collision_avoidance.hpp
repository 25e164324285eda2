#pragma once

#include <span>

#include "prd/common/random.hpp"
#include "prd/env/environment.hpp"

namespace prd::env {

struct CollisionAvoidanceConfig {
  int num_teams = 2;
  int agents_per_team = 3;
  double arena_half_width = 1.0;
  double step_size = 0.1;
  double collision_radius = 0.1;
  double goal_radius = 0.1;
  double distance_coefficient = 0.1;
  double collision_penalty = -1.0;
  int max_timesteps = 100;

  int num_agents() const { return num_teams * agents_per_team; }
  // 3 teams of 8 agents.
  static CollisionAvoidanceConfig full_scale();
  // Throws ConfigError on an unusable configuration.
  void validate() const;
};

// Actions: 0 stay, 1 north (+y), 2 south (-y), 3 east (+x), 4 west (-x).
inline constexpr int kCaNumActions = 5;

// Reward of one agent given current positions:
// -distance_coefficient * |pos_i - goal_i| plus collision_penalty for every
// teammate closer than collision_radius. Agents on other teams never matter.
double ca_reward(int agent, std::span<const Eigen::Vector2d> positions,
                 std::span<const Eigen::Vector2d> goals, std::span<const int> team_ids,
                 const CollisionAvoidanceConfig& config);

// Team collision avoidance in a bounded square arena.
//
// Teams partition agents contiguously. Observation per agent:
// [position(2), velocity(2), team one-hot(num_teams), goal(2),
//  relative positions of every other agent (2(M-1)), their team ids (M-1)].
// Critic state per agent: [position(2), velocity(2), team one-hot, goal(2)].
class CollisionAvoidance final : public Environment {
 public:
  explicit CollisionAvoidance(CollisionAvoidanceConfig config);

  std::string name() const override { return "collision_avoidance"; }
  int num_agents() const override { return config_.num_agents(); }
  int observation_dim() const override;
  int state_dim() const override;
  int num_actions() const override { return kCaNumActions; }
  int max_timesteps() const override { return config_.max_timesteps; }
  std::vector<int> team_ids() const override { return teams_; }

  ResetResult reset(std::uint64_t seed) override;
  StepResult step(const JointAction& action) override;

  EnvState state() const override;
  JointObservation observation() const override;
  std::unique_ptr<Environment> clone() const override;

  const CollisionAvoidanceConfig& config() const { return config_; }
  std::span<const Eigen::Vector2d> positions() const { return positions_; }
  std::span<const Eigen::Vector2d> goals() const { return goals_; }
  bool all_at_goal() const;

  // Places agents and goals explicitly; used by tests and replays.
  void set_layout(std::vector<Eigen::Vector2d> positions, std::vector<Eigen::Vector2d> goals);

 private:
  CollisionAvoidanceConfig config_;
  std::vector<int> teams_;
  std::vector<Eigen::Vector2d> positions_;
  std::vector<Eigen::Vector2d> velocities_;
  std::vector<Eigen::Vector2d> goals_;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace prd::env
