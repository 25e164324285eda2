#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "prd/env/factory.hpp"
#include "prd/nets/model.hpp"
#include "prd/optimize/trainer.hpp"

namespace prd::app {

struct NetConfig {
  int hidden = 64;
  int attention_dim = 64;
  double popart_beta = 0.01;
};

struct RunConfig {
  long long total_updates = 1000;
  std::uint64_t seed = 0;
  // Policy updates between checkpoints (100 updates x 10 episodes = 1000 episodes).
  long long checkpoint_interval = 100;
  std::string output_dir = "runs";
  // Also write every collected episode as JSON lines (large).
  bool dump_trajectories = false;
};

struct HyperConfig {
  env::EnvConfig env;
  std::string scale = "desk";  // "desk" | "full" preset for the environment block
  std::string variant = "prd-soft";
  int num_episodes = 10;  // episodes per policy update
  optimize::OptimConfig optim;
  optimize::AlgoConfig algo;
  NetConfig net;
  RunConfig run;
};

// Variants: mappo, prd-hard, prd-soft, prd-shared, prd-ascend, prd-decay, prd-topk.
credit::Strategy variant_strategy(const std::string& variant);

// Defaults for an environment / variant pair (tuned table values).
HyperConfig default_config(const std::string& env_name, const std::string& variant,
                           const std::string& scale = "desk");

// Parses a config document: defaults for its env / variant / scale, then the
// explicit values. Unknown keys and invalid values throw ConfigError.
HyperConfig parse_config(const nlohmann::json& doc);
HyperConfig load_config(const std::filesystem::path& path);
// Full document with every field; parse_config(to_json(c)) == c.
nlohmann::json to_json(const HyperConfig& config);

// Throws ConfigError when the configuration cannot run.
void validate(const HyperConfig& config);

nets::ModelConfig model_config(const HyperConfig& config);

}  // namespace prd::app
