#pragma once

#include "prd/env/factory.hpp"
#include "prd/nets/model.hpp"

namespace prd::test {

// Two teams of two agents on a short horizon.
inline env::EnvConfig small_ca(int max_timesteps = 12) {
  env::EnvConfig config;
  config.name = "collision_avoidance";
  config.collision_avoidance.num_teams = 2;
  config.collision_avoidance.agents_per_team = 2;
  config.collision_avoidance.max_timesteps = max_timesteps;
  return config;
}

inline nets::ModelConfig small_model_config(const env::EnvConfig& config, int hidden = 8) {
  auto env = env::make_env(config);
  nets::ModelConfig mc;
  mc.obs_dim = env->observation_dim();
  mc.state_dim = env->state_dim();
  mc.num_actions = env->num_actions();
  mc.num_agents = env->num_agents();
  mc.hidden = hidden;
  mc.attention_dim = 4;
  return mc;
}

}  // namespace prd::test
