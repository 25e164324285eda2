#pragma once

#include <optional>
#include <span>

#include "prd/common/random.hpp"
#include "prd/env/environment.hpp"

namespace prd::env {

struct LbfConfig {
  int grid_size = 6;
  int num_agents = 3;
  int num_food = 2;
  int max_agent_level = 2;
  int max_food_level = 3;
  int max_timesteps = 70;
  // Optional fixed levels; random in [1, max_*_level] when empty.
  std::vector<int> agent_levels;
  std::vector<int> food_levels;

  // 8x8 grid, 4 agents, 3 food.
  static LbfConfig full_scale();
  // Throws ConfigError on an unusable configuration, including fixed food
  // levels that exceed the total agent level.
  void validate() const;
};

// Actions: 0 no-op, 1 north, 2 south, 3 west, 4 east, 5 collect.
inline constexpr int kLbfNumActions = 6;
inline constexpr int kLbfCollect = 5;

// Per-collector share of one food item before episode normalization.
//
// Succeeds iff sum(collector levels) >= food_level; collector i then gets
// food_level * level_i / sum(levels). All zeros on failure.
std::vector<double> lbf_reward(std::span<const int> collector_levels, int food_level);

// Level-based foraging on a square grid.
//
// Rewards are the proportional split above divided by the total food level
// spawned this episode, so the team return under full collection is 1.
// Observation per agent: [x, y, level, (dx, dy, level) per other agent,
// (dx, dy, level) per food item], positions scaled by 1/grid_size and
// collected food reported as zeros.
// Critic state per agent: [x, y, level, (dx, dy, level) per food item].
class LevelBasedForaging final : public Environment {
 public:
  explicit LevelBasedForaging(LbfConfig config);

  std::string name() const override { return "lbf"; }
  int num_agents() const override { return config_.num_agents; }
  int observation_dim() const override;
  int state_dim() const override;
  int num_actions() const override { return kLbfNumActions; }
  int max_timesteps() const override { return config_.max_timesteps; }
  std::vector<int> team_ids() const override;

  ResetResult reset(std::uint64_t seed) override;
  StepResult step(const JointAction& action) override;

  EnvState state() const override;
  JointObservation observation() const override;
  std::unique_ptr<Environment> clone() const override;

  struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  struct Food {
    Cell cell;
    int level = 0;
    bool collected = false;
  };

  std::span<const Cell> agent_cells() const { return agents_; }
  std::span<const int> agent_levels() const { return levels_; }
  std::span<const Food> food() const { return food_; }
  double total_food_level() const { return total_food_level_; }

  // Places agents and food explicitly; used by tests.
  void set_layout(std::vector<Cell> agents, std::vector<int> levels, std::vector<Food> food);

 private:
  bool occupied(const Cell& cell) const;

  LbfConfig config_;
  std::vector<Cell> agents_;
  std::vector<int> levels_;
  std::vector<Food> food_;
  double total_food_level_ = 0.0;
  int t_ = 0;
  bool done_ = true;
};

}  // namespace prd::env
