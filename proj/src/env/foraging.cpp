#include "prd/env/foraging.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "prd/common/errors.hpp"

namespace prd::env {

LbfConfig LbfConfig::full_scale() {
  LbfConfig config;
  config.grid_size = 8;
  config.num_agents = 4;
  config.num_food = 3;
  config.max_agent_level = 3;
  config.max_food_level = 5;
  return config;
}

void LbfConfig::validate() const {
  if (num_agents < 1) throw ConfigError("lbf needs at least one agent");
  if (num_food < 1) throw ConfigError("lbf needs at least one food item");
  if (grid_size < 2) throw ConfigError("lbf grid_size must be >= 2");
  if (num_agents + num_food > grid_size * grid_size) {
    throw ConfigError("lbf grid too small for all agents and food");
  }
  if (max_agent_level < 1 || max_food_level < 1) throw ConfigError("lbf levels must be >= 1");
  if (max_timesteps < 1) throw ConfigError("max_timesteps must be >= 1");
  if (!agent_levels.empty()) {
    if (static_cast<int>(agent_levels.size()) != num_agents) {
      throw ConfigError("lbf agent_levels must list one level per agent");
    }
    for (int level : agent_levels) {
      if (level < 1) throw ConfigError("lbf agent levels must be >= 1");
    }
  }
  const int min_total = agent_levels.empty()
                            ? num_agents
                            : std::accumulate(agent_levels.begin(), agent_levels.end(), 0);
  if (!food_levels.empty()) {
    if (static_cast<int>(food_levels.size()) != num_food) {
      throw ConfigError("lbf food_levels must list one level per food item");
    }
    for (int level : food_levels) {
      if (level < 1) throw ConfigError("lbf food levels must be >= 1");
      if (level > min_total) {
        throw ConfigError("lbf food level " + std::to_string(level) +
                          " exceeds the total agent level " + std::to_string(min_total));
      }
    }
  }
}

std::vector<double> lbf_reward(std::span<const int> collector_levels, int food_level) {
  std::vector<double> shares(collector_levels.size(), 0.0);
  const int total = std::accumulate(collector_levels.begin(), collector_levels.end(), 0);
  if (total <= 0 || total < food_level) return shares;
  for (std::size_t i = 0; i < collector_levels.size(); ++i) {
    shares[i] = static_cast<double>(food_level) * collector_levels[i] / total;
  }
  return shares;
}

LevelBasedForaging::LevelBasedForaging(LbfConfig config) : config_(std::move(config)) {
  config_.validate();
}

int LevelBasedForaging::observation_dim() const {
  return 3 + 3 * (config_.num_agents - 1) + 3 * config_.num_food;
}

int LevelBasedForaging::state_dim() const { return 3 + 3 * config_.num_food; }

std::vector<int> LevelBasedForaging::team_ids() const {
  return std::vector<int>(static_cast<std::size_t>(config_.num_agents), 0);
}

ResetResult LevelBasedForaging::reset(std::uint64_t seed) {
  Rng rng(seed);
  const int cells = config_.grid_size * config_.grid_size;
  std::vector<int> order(static_cast<std::size_t>(cells));
  std::iota(order.begin(), order.end(), 0);
  for (int i = cells - 1; i > 0; --i) {
    const int j = static_cast<int>(uniform01(rng) * (i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  auto to_cell = [&](int index) { return Cell{index % config_.grid_size, index / config_.grid_size}; };
  auto draw_level = [&](int max_level) { return 1 + static_cast<int>(uniform01(rng) * max_level); };

  const auto m = static_cast<std::size_t>(config_.num_agents);
  const auto f = static_cast<std::size_t>(config_.num_food);
  agents_.resize(m);
  levels_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    agents_[i] = to_cell(order[i]);
    levels_[i] = config_.agent_levels.empty() ? draw_level(config_.max_agent_level)
                                              : config_.agent_levels[i];
  }
  const int level_sum = std::accumulate(levels_.begin(), levels_.end(), 0);
  food_.resize(f);
  total_food_level_ = 0.0;
  for (std::size_t k = 0; k < f; ++k) {
    food_[k].cell = to_cell(order[m + k]);
    food_[k].level = config_.food_levels.empty()
                         ? draw_level(std::min(config_.max_food_level, level_sum))
                         : config_.food_levels[k];
    food_[k].collected = false;
    total_food_level_ += food_[k].level;
  }
  t_ = 0;
  done_ = false;
  return {state(), observation()};
}

void LevelBasedForaging::set_layout(std::vector<Cell> agents, std::vector<int> levels,
                                    std::vector<Food> food) {
  if (agents.size() != static_cast<std::size_t>(config_.num_agents) ||
      levels.size() != agents.size() || food.size() != static_cast<std::size_t>(config_.num_food)) {
    throw ContractError("set_layout: wrong number of agents, levels or food items");
  }
  agents_ = std::move(agents);
  levels_ = std::move(levels);
  food_ = std::move(food);
  total_food_level_ = 0.0;
  for (const auto& item : food_) total_food_level_ += item.level;
  t_ = 0;
  done_ = false;
}

bool LevelBasedForaging::occupied(const Cell& cell) const {
  for (const auto& a : agents_) {
    if (a == cell) return true;
  }
  for (const auto& item : food_) {
    if (!item.collected && item.cell == cell) return true;
  }
  return false;
}

StepResult LevelBasedForaging::step(const JointAction& action) {
  if (done_) throw UsageError("step() called on a finished lbf episode");
  const std::size_t m = agents_.size();
  if (action.size() != m) throw ContractError("joint action has wrong number of agents");

  // Movement: a move succeeds when the target is in bounds, currently empty,
  // and claimed by no other agent.
  std::vector<Cell> targets = agents_;
  for (std::size_t i = 0; i < m; ++i) {
    Cell target = agents_[i];
    switch (action[i]) {
      case 0:
      case kLbfCollect: break;
      case 1: target.y += 1; break;
      case 2: target.y -= 1; break;
      case 3: target.x -= 1; break;
      case 4: target.x += 1; break;
      default:
        throw ContractError("lbf action out of range: " + std::to_string(action[i]));
    }
    const bool in_bounds = target.x >= 0 && target.y >= 0 && target.x < config_.grid_size &&
                           target.y < config_.grid_size;
    if (!(target == agents_[i]) && in_bounds && !occupied(target)) targets[i] = target;
  }
  std::vector<Cell> next = agents_;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] == agents_[i]) continue;
    bool contested = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i && targets[j] == targets[i]) contested = true;
    }
    if (!contested) next[i] = targets[i];
  }
  agents_ = std::move(next);

  Eigen::VectorXd rewards = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (auto& item : food_) {
    if (item.collected) continue;
    std::vector<std::size_t> collectors;
    std::vector<int> collector_levels;
    for (std::size_t i = 0; i < m; ++i) {
      const int manhattan =
          std::abs(agents_[i].x - item.cell.x) + std::abs(agents_[i].y - item.cell.y);
      if (manhattan == 1 && action[i] == kLbfCollect) {
        collectors.push_back(i);
        collector_levels.push_back(levels_[i]);
      }
    }
    if (collectors.empty()) continue;
    const std::vector<double> shares = lbf_reward(collector_levels, item.level);
    if (shares.front() == 0.0) continue;
    item.collected = true;
    for (std::size_t c = 0; c < collectors.size(); ++c) {
      rewards(static_cast<Eigen::Index>(collectors[c])) += shares[c] / total_food_level_;
    }
  }
  ++t_;

  StepResult result;
  result.terminated = std::all_of(food_.begin(), food_.end(),
                                  [](const Food& item) { return item.collected; });
  done_ = result.terminated || t_ >= config_.max_timesteps;
  result.done = done_;
  result.reward = RewardVector::from_individual(std::move(rewards));
  result.state = state();
  result.observation = observation();
  return result;
}

EnvState LevelBasedForaging::state() const {
  const int m = config_.num_agents;
  const double scale = 1.0 / config_.grid_size;
  EnvState s;
  s.agent_states.setZero(m, state_dim());
  for (int i = 0; i < m; ++i) {
    const auto& a = agents_[static_cast<std::size_t>(i)];
    s.agent_states(i, 0) = a.x * scale;
    s.agent_states(i, 1) = a.y * scale;
    s.agent_states(i, 2) = levels_[static_cast<std::size_t>(i)];
    int col = 3;
    for (const auto& item : food_) {
      if (!item.collected) {
        s.agent_states(i, col) = (item.cell.x - a.x) * scale;
        s.agent_states(i, col + 1) = (item.cell.y - a.y) * scale;
        s.agent_states(i, col + 2) = item.level;
      }
      col += 3;
    }
  }
  s.t = t_;
  s.done = done_;
  return s;
}

JointObservation LevelBasedForaging::observation() const {
  const int m = config_.num_agents;
  const double scale = 1.0 / config_.grid_size;
  const EnvState s = state();
  JointObservation obs = JointObservation::Zero(m, observation_dim());
  for (int i = 0; i < m; ++i) {
    const auto& a = agents_[static_cast<std::size_t>(i)];
    obs.row(i).head(3) = s.agent_states.row(i).head(3);
    int col = 3;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const auto& b = agents_[static_cast<std::size_t>(j)];
      obs(i, col) = (b.x - a.x) * scale;
      obs(i, col + 1) = (b.y - a.y) * scale;
      obs(i, col + 2) = levels_[static_cast<std::size_t>(j)];
      col += 3;
    }
    obs.row(i).segment(col, 3 * config_.num_food) =
        s.agent_states.row(i).segment(3, 3 * config_.num_food);
  }
  return obs;
}

std::unique_ptr<Environment> LevelBasedForaging::clone() const {
  return std::make_unique<LevelBasedForaging>(*this);
}

}  // namespace prd::env
