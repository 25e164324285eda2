#include "prd/env/collision_avoidance.hpp"

#include <cmath>
#include <string>

#include "prd/common/errors.hpp"

namespace prd::env {

Eigen::VectorXd EnvState::global() const {
  Eigen::VectorXd flat(agent_states.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < agent_states.rows(); ++r) {
    for (Eigen::Index c = 0; c < agent_states.cols(); ++c) flat(k++) = agent_states(r, c);
  }
  return flat;
}

RewardVector RewardVector::from_individual(Eigen::VectorXd rewards) {
  RewardVector out;
  out.individual = std::move(rewards);
  double total = 0.0;
  for (Eigen::Index i = 0; i < out.individual.size(); ++i) total += out.individual(i);
  out.shared = total;
  return out;
}

CollisionAvoidanceConfig CollisionAvoidanceConfig::full_scale() {
  CollisionAvoidanceConfig config;
  config.num_teams = 3;
  config.agents_per_team = 8;
  return config;
}

void CollisionAvoidanceConfig::validate() const {
  if (num_teams < 1 || agents_per_team < 1) {
    throw ConfigError("collision avoidance needs at least one team with one agent");
  }
  if (num_agents() < 2) throw ConfigError("collision avoidance needs at least two agents");
  if (!(arena_half_width > 0.0) || !(step_size > 0.0) || !(collision_radius >= 0.0) ||
      !(goal_radius > 0.0)) {
    throw ConfigError("collision avoidance geometry must be positive");
  }
  if (max_timesteps < 1) throw ConfigError("max_timesteps must be >= 1");
}

double ca_reward(int agent, std::span<const Eigen::Vector2d> positions,
                 std::span<const Eigen::Vector2d> goals, std::span<const int> team_ids,
                 const CollisionAvoidanceConfig& config) {
  const auto i = static_cast<std::size_t>(agent);
  double reward = -config.distance_coefficient * (positions[i] - goals[i]).norm();
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i || team_ids[j] != team_ids[i]) continue;
    if ((positions[i] - positions[j]).norm() < config.collision_radius) {
      reward += config.collision_penalty;
    }
  }
  return reward;
}

CollisionAvoidance::CollisionAvoidance(CollisionAvoidanceConfig config)
    : config_(config) {
  config_.validate();
  teams_.resize(static_cast<std::size_t>(config_.num_agents()));
  for (int i = 0; i < config_.num_agents(); ++i) {
    teams_[static_cast<std::size_t>(i)] = i / config_.agents_per_team;
  }
  const auto m = static_cast<std::size_t>(config_.num_agents());
  positions_.assign(m, Eigen::Vector2d::Zero());
  velocities_.assign(m, Eigen::Vector2d::Zero());
  goals_.assign(m, Eigen::Vector2d::Zero());
}

int CollisionAvoidance::observation_dim() const {
  const int m = config_.num_agents();
  return 2 + 2 + config_.num_teams + 2 + 2 * (m - 1) + (m - 1);
}

int CollisionAvoidance::state_dim() const { return 2 + 2 + config_.num_teams + 2; }

namespace {

// Rejection-samples `count` points in the arena with pairwise spacing >= min_spacing.
std::vector<Eigen::Vector2d> sample_spaced(std::size_t count, double half_width,
                                           double min_spacing, Rng& rng) {
  constexpr int kMaxAttempts = 10000;
  std::vector<Eigen::Vector2d> points;
  points.reserve(count);
  while (points.size() < count) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      Eigen::Vector2d p((2.0 * uniform01(rng) - 1.0) * half_width,
                        (2.0 * uniform01(rng) - 1.0) * half_width);
      bool ok = true;
      for (const auto& q : points) {
        if ((p - q).norm() < min_spacing) {
          ok = false;
          break;
        }
      }
      if (ok) {
        points.push_back(p);
        placed = true;
      }
    }
    if (!placed) throw ConfigError("arena too crowded to place agents without overlap");
  }
  return points;
}

}  // namespace

ResetResult CollisionAvoidance::reset(std::uint64_t seed) {
  Rng rng(seed);
  const auto m = static_cast<std::size_t>(config_.num_agents());
  positions_ = sample_spaced(m, config_.arena_half_width, config_.collision_radius, rng);
  goals_ = sample_spaced(m, config_.arena_half_width, 2.0 * config_.collision_radius, rng);
  velocities_.assign(m, Eigen::Vector2d::Zero());
  t_ = 0;
  done_ = false;
  return {state(), observation()};
}

void CollisionAvoidance::set_layout(std::vector<Eigen::Vector2d> positions,
                                    std::vector<Eigen::Vector2d> goals) {
  const auto m = static_cast<std::size_t>(config_.num_agents());
  if (positions.size() != m || goals.size() != m) {
    throw ContractError("set_layout: expected one position and goal per agent");
  }
  positions_ = std::move(positions);
  goals_ = std::move(goals);
  velocities_.assign(m, Eigen::Vector2d::Zero());
  t_ = 0;
  done_ = false;
}

bool CollisionAvoidance::all_at_goal() const {
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    if ((positions_[i] - goals_[i]).norm() > config_.goal_radius) return false;
  }
  return true;
}

StepResult CollisionAvoidance::step(const JointAction& action) {
  if (done_) throw UsageError("step() called on a finished collision avoidance episode");
  const auto m = static_cast<std::size_t>(config_.num_agents());
  if (action.size() != m) throw ContractError("joint action has wrong number of agents");

  const double hw = config_.arena_half_width;
  for (std::size_t i = 0; i < m; ++i) {
    Eigen::Vector2d delta = Eigen::Vector2d::Zero();
    switch (action[i]) {
      case 0: break;
      case 1: delta.y() = config_.step_size; break;
      case 2: delta.y() = -config_.step_size; break;
      case 3: delta.x() = config_.step_size; break;
      case 4: delta.x() = -config_.step_size; break;
      default:
        throw ContractError("collision avoidance action out of range: " +
                            std::to_string(action[i]));
    }
    if (delta.isZero()) {
      velocities_[i].setZero();
      continue;
    }
    const Eigen::Vector2d next = (positions_[i] + delta).cwiseMax(-hw).cwiseMin(hw);
    velocities_[i] = next - positions_[i];
    positions_[i] = next;
  }
  ++t_;

  Eigen::VectorXd rewards(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    rewards(static_cast<Eigen::Index>(i)) =
        ca_reward(static_cast<int>(i), positions_, goals_, teams_, config_);
  }

  StepResult result;
  result.terminated = all_at_goal();
  done_ = result.terminated || t_ >= config_.max_timesteps;
  result.done = done_;
  result.reward = RewardVector::from_individual(std::move(rewards));
  result.state = state();
  result.observation = observation();
  return result;
}

EnvState CollisionAvoidance::state() const {
  const int m = config_.num_agents();
  EnvState s;
  s.agent_states.setZero(m, state_dim());
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    s.agent_states(i, 0) = positions_[ui].x();
    s.agent_states(i, 1) = positions_[ui].y();
    s.agent_states(i, 2) = velocities_[ui].x();
    s.agent_states(i, 3) = velocities_[ui].y();
    s.agent_states(i, 4 + teams_[ui]) = 1.0;
    s.agent_states(i, 4 + config_.num_teams) = goals_[ui].x();
    s.agent_states(i, 5 + config_.num_teams) = goals_[ui].y();
  }
  s.t = t_;
  s.done = done_;
  return s;
}

JointObservation CollisionAvoidance::observation() const {
  const int m = config_.num_agents();
  JointObservation obs = JointObservation::Zero(m, observation_dim());
  const int own = state_dim();
  const EnvState s = state();
  for (int i = 0; i < m; ++i) {
    obs.row(i).head(own) = s.agent_states.row(i);
    int rel = own;
    int ids = own + 2 * (m - 1);
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const Eigen::Vector2d d =
          positions_[static_cast<std::size_t>(j)] - positions_[static_cast<std::size_t>(i)];
      obs(i, rel++) = d.x();
      obs(i, rel++) = d.y();
      obs(i, ids++) = static_cast<double>(teams_[static_cast<std::size_t>(j)]);
    }
  }
  return obs;
}

std::unique_ptr<Environment> CollisionAvoidance::clone() const {
  return std::make_unique<CollisionAvoidance>(*this);
}

}  // namespace prd::env
