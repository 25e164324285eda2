#include "prd/env/factory.hpp"

#include "prd/common/errors.hpp"

namespace prd::env {

std::unique_ptr<Environment> make_env(const EnvConfig& config) {
  if (config.name == "collision_avoidance") {
    return std::make_unique<CollisionAvoidance>(config.collision_avoidance);
  }
  if (config.name == "lbf") return std::make_unique<LevelBasedForaging>(config.lbf);
  throw ConfigError("unknown environment: " + config.name);
}

EnvFactory make_env_factory(const EnvConfig& config) {
  // Validate eagerly so configuration errors surface before any rollout.
  make_env(config);
  return [config] { return make_env(config); };
}

std::string to_string(RewardMode mode) {
  return mode == RewardMode::kShared ? "shared" : "individual";
}

RewardMode reward_mode_from_string(const std::string& text) {
  if (text == "individual") return RewardMode::kIndividual;
  if (text == "shared") return RewardMode::kShared;
  throw ConfigError("unknown reward mode: " + text);
}

}  // namespace prd::env
