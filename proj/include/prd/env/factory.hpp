#pragma once

#include <functional>
#include <memory>
#include <string>

#include "prd/env/collision_avoidance.hpp"
#include "prd/env/foraging.hpp"

namespace prd::env {

struct EnvConfig {
  std::string name = "collision_avoidance";  // "collision_avoidance" | "lbf"
  RewardMode reward_mode = RewardMode::kIndividual;
  CollisionAvoidanceConfig collision_avoidance;
  LbfConfig lbf;
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

std::unique_ptr<Environment> make_env(const EnvConfig& config);
EnvFactory make_env_factory(const EnvConfig& config);

std::string to_string(RewardMode mode);
RewardMode reward_mode_from_string(const std::string& text);

}  // namespace prd::env
