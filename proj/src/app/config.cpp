#include "prd/app/config.hpp"

#include <initializer_list>
#include <set>

#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"

namespace prd::app {

using nlohmann::json;

credit::Strategy variant_strategy(const std::string& variant) {
  if (variant == "mappo") return credit::Strategy::kNone;
  if (variant == "prd-hard") return credit::Strategy::kHard;
  if (variant == "prd-soft") return credit::Strategy::kSoft;
  if (variant == "prd-shared") return credit::Strategy::kShared;
  if (variant == "prd-ascend") return credit::Strategy::kAscend;
  if (variant == "prd-decay") return credit::Strategy::kDecay;
  if (variant == "prd-topk") return credit::Strategy::kTopK;
  throw ConfigError("unknown algorithm variant: " + variant);
}

HyperConfig default_config(const std::string& env_name, const std::string& variant,
                           const std::string& scale) {
  HyperConfig c;
  c.env.name = env_name;
  c.variant = variant;
  c.scale = scale;
  if (scale == "full") {
    c.env.collision_avoidance = env::CollisionAvoidanceConfig::full_scale();
    c.env.lbf = env::LbfConfig::full_scale();
  } else if (scale != "desk") {
    throw ConfigError("env.scale must be 'desk' or 'full'");
  }
  const credit::Strategy strategy = variant_strategy(variant);
  const bool prd = strategy != credit::Strategy::kNone;
  c.algo.credit.strategy = strategy;
  c.optim.epochs = 5;
  c.num_episodes = 10;
  c.optim.policy_lr = 5e-4;
  c.optim.value_lr = 5e-4;
  if (env_name == "collision_avoidance") {
    c.optim.clip = 0.05;
    c.optim.entropy_coef = prd ? 1e-3 : 8e-3;
    c.algo.credit.epsilon = 0.12;
  } else if (env_name == "lbf") {
    c.optim.clip = 0.2;
    c.optim.entropy_coef = prd ? 1e-3 : 1e-2;
    c.algo.credit.epsilon = 0.2;
  } else {
    throw ConfigError("unknown environment: " + env_name);
  }
  c.algo.credit.theta = c.algo.credit.epsilon;
  c.algo.credit.ramp = 500;
  c.algo.credit.k = 1;
  return c;
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> names(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!names.contains(item.key())) throw ConfigError("unknown config key: " + where + "." + item.key());
  }
}

template <typename T>
void read(const json& obj, const std::string& where, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key " + where + "." + key + " has the wrong type");
  }
}

json section(const json& doc, const char* key) {
  return doc.contains(key) ? doc.at(key) : json::object();
}

}  // namespace

HyperConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"env", "algo", "prd", "net", "run"});
  const json env_j = section(doc, "env");
  const json algo_j = section(doc, "algo");
  const json prd_j = section(doc, "prd");
  const json net_j = section(doc, "net");
  const json run_j = section(doc, "run");
  check_keys(env_j, "env", {"name", "scale", "reward_mode", "collision_avoidance", "lbf"});
  check_keys(algo_j, "algo",
             {"variant", "gamma", "lambda", "clip", "entropy_coef", "epochs", "num_episodes", "num_minibatch",
              "policy_lr", "value_lr", "huber_delta", "max_grad_norm", "adam_eps", "weight_decay",
              "normalize_advantages"});
  check_keys(prd_j, "prd", {"epsilon", "theta", "N", "k"});
  check_keys(net_j, "net", {"hidden", "attention_dim", "chunk_length", "popart_beta"});
  check_keys(run_j, "run", {"total_updates", "seed", "checkpoint_interval", "output_dir", "dump_trajectories"});

  std::string env_name = "collision_avoidance";
  std::string scale = "desk";
  std::string variant = "prd-soft";
  read(env_j, "env", "name", env_name);
  read(env_j, "env", "scale", scale);
  read(algo_j, "algo", "variant", variant);
  HyperConfig c = default_config(env_name, variant, scale);

  std::string reward_mode = env::to_string(c.env.reward_mode);
  read(env_j, "env", "reward_mode", reward_mode);
  c.env.reward_mode = env::reward_mode_from_string(reward_mode);
  if (env_j.contains("collision_avoidance")) {
    const json& j = env_j.at("collision_avoidance");
    const std::string w = "env.collision_avoidance";
    check_keys(j, w, {"num_teams", "agents_per_team", "arena_half_width", "step_size", "collision_radius",
                      "goal_radius", "distance_coefficient", "collision_penalty", "max_timesteps"});
    auto& ca = c.env.collision_avoidance;
    read(j, w, "num_teams", ca.num_teams);
    read(j, w, "agents_per_team", ca.agents_per_team);
    read(j, w, "arena_half_width", ca.arena_half_width);
    read(j, w, "step_size", ca.step_size);
    read(j, w, "collision_radius", ca.collision_radius);
    read(j, w, "goal_radius", ca.goal_radius);
    read(j, w, "distance_coefficient", ca.distance_coefficient);
    read(j, w, "collision_penalty", ca.collision_penalty);
    read(j, w, "max_timesteps", ca.max_timesteps);
  }
  if (env_j.contains("lbf")) {
    const json& j = env_j.at("lbf");
    const std::string w = "env.lbf";
    check_keys(j, w, {"grid_size", "num_agents", "num_food", "max_agent_level", "max_food_level",
                      "max_timesteps", "agent_levels", "food_levels"});
    auto& lbf = c.env.lbf;
    read(j, w, "grid_size", lbf.grid_size);
    read(j, w, "num_agents", lbf.num_agents);
    read(j, w, "num_food", lbf.num_food);
    read(j, w, "max_agent_level", lbf.max_agent_level);
    read(j, w, "max_food_level", lbf.max_food_level);
    read(j, w, "max_timesteps", lbf.max_timesteps);
    read(j, w, "agent_levels", lbf.agent_levels);
    read(j, w, "food_levels", lbf.food_levels);
  }

  read(algo_j, "algo", "gamma", c.algo.gamma);
  read(algo_j, "algo", "lambda", c.algo.lambda);
  read(algo_j, "algo", "clip", c.optim.clip);
  read(algo_j, "algo", "entropy_coef", c.optim.entropy_coef);
  read(algo_j, "algo", "epochs", c.optim.epochs);
  read(algo_j, "algo", "num_episodes", c.num_episodes);
  read(algo_j, "algo", "num_minibatch", c.optim.num_minibatch);
  read(algo_j, "algo", "policy_lr", c.optim.policy_lr);
  read(algo_j, "algo", "value_lr", c.optim.value_lr);
  read(algo_j, "algo", "huber_delta", c.optim.huber_delta);
  read(algo_j, "algo", "max_grad_norm", c.optim.max_grad_norm);
  read(algo_j, "algo", "adam_eps", c.optim.adam_eps);
  read(algo_j, "algo", "weight_decay", c.optim.weight_decay);
  read(algo_j, "algo", "normalize_advantages", c.algo.normalize_advantages);

  read(prd_j, "prd", "epsilon", c.algo.credit.epsilon);
  read(prd_j, "prd", "theta", c.algo.credit.theta);
  read(prd_j, "prd", "N", c.algo.credit.ramp);
  read(prd_j, "prd", "k", c.algo.credit.k);

  read(net_j, "net", "hidden", c.net.hidden);
  read(net_j, "net", "attention_dim", c.net.attention_dim);
  read(net_j, "net", "chunk_length", c.optim.chunk_length);
  read(net_j, "net", "popart_beta", c.net.popart_beta);

  read(run_j, "run", "total_updates", c.run.total_updates);
  read(run_j, "run", "seed", c.run.seed);
  read(run_j, "run", "checkpoint_interval", c.run.checkpoint_interval);
  read(run_j, "run", "output_dir", c.run.output_dir);
  read(run_j, "run", "dump_trajectories", c.run.dump_trajectories);

  c.algo.shared_reward = c.env.reward_mode == env::RewardMode::kShared;
  validate(c);
  return c;
}

HyperConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const HyperConfig& c) {
  const auto& ca = c.env.collision_avoidance;
  const auto& lbf = c.env.lbf;
  json doc;
  doc["env"] = {
      {"name", c.env.name},
      {"scale", c.scale},
      {"reward_mode", env::to_string(c.env.reward_mode)},
      {"collision_avoidance",
       {{"num_teams", ca.num_teams},
        {"agents_per_team", ca.agents_per_team},
        {"arena_half_width", ca.arena_half_width},
        {"step_size", ca.step_size},
        {"collision_radius", ca.collision_radius},
        {"goal_radius", ca.goal_radius},
        {"distance_coefficient", ca.distance_coefficient},
        {"collision_penalty", ca.collision_penalty},
        {"max_timesteps", ca.max_timesteps}}},
      {"lbf",
       {{"grid_size", lbf.grid_size},
        {"num_agents", lbf.num_agents},
        {"num_food", lbf.num_food},
        {"max_agent_level", lbf.max_agent_level},
        {"max_food_level", lbf.max_food_level},
        {"max_timesteps", lbf.max_timesteps},
        {"agent_levels", lbf.agent_levels},
        {"food_levels", lbf.food_levels}}}};
  doc["algo"] = {{"variant", c.variant},
                 {"gamma", c.algo.gamma},
                 {"lambda", c.algo.lambda},
                 {"clip", c.optim.clip},
                 {"entropy_coef", c.optim.entropy_coef},
                 {"epochs", c.optim.epochs},
                 {"num_episodes", c.num_episodes},
                 {"num_minibatch", c.optim.num_minibatch},
                 {"policy_lr", c.optim.policy_lr},
                 {"value_lr", c.optim.value_lr},
                 {"huber_delta", c.optim.huber_delta},
                 {"max_grad_norm", c.optim.max_grad_norm},
                 {"adam_eps", c.optim.adam_eps},
                 {"weight_decay", c.optim.weight_decay},
                 {"normalize_advantages", c.algo.normalize_advantages}};
  doc["prd"] = {{"epsilon", c.algo.credit.epsilon},
                {"theta", c.algo.credit.theta},
                {"N", c.algo.credit.ramp},
                {"k", c.algo.credit.k}};
  doc["net"] = {{"hidden", c.net.hidden},
                {"attention_dim", c.net.attention_dim},
                {"chunk_length", c.optim.chunk_length},
                {"popart_beta", c.net.popart_beta}};
  doc["run"] = {{"total_updates", c.run.total_updates},
                {"seed", c.run.seed},
                {"checkpoint_interval", c.run.checkpoint_interval},
                {"output_dir", c.run.output_dir},
                {"dump_trajectories", c.run.dump_trajectories}};
  return doc;
}

void validate(const HyperConfig& c) {
  env::make_env(c.env);
  const int m = c.env.name == "lbf" ? c.env.lbf.num_agents : c.env.collision_avoidance.num_agents();
  if (m < 2) throw ConfigError("at least two agents are required");
  credit::validate(c.algo.credit, m);
  if (c.algo.shared_reward && c.algo.credit.strategy != credit::Strategy::kNone &&
      c.algo.credit.strategy != credit::Strategy::kShared) {
    throw ConfigError("reward_mode 'shared' supports only the mappo and prd-shared variants");
  }
  if (!(c.algo.gamma >= 0.0 && c.algo.gamma <= 1.0) || !(c.algo.lambda >= 0.0 && c.algo.lambda <= 1.0)) {
    throw ConfigError("gamma and lambda must lie in [0, 1]");
  }
  if (c.num_episodes < 1) throw ConfigError("algo.num_episodes must be >= 1");
  if (c.optim.epochs < 1 || c.optim.num_minibatch < 1 || c.optim.chunk_length < 1) {
    throw ConfigError("epochs, num_minibatch and chunk_length must be >= 1");
  }
  if (!(c.optim.clip > 0.0) || c.optim.entropy_coef < 0.0 || !(c.optim.huber_delta > 0.0) ||
      c.optim.policy_lr < 0.0 || c.optim.value_lr < 0.0 || !(c.optim.adam_eps > 0.0) ||
      c.optim.weight_decay < 0.0) {
    throw ConfigError("invalid optimizer settings");
  }
  if (c.net.hidden < 1 || c.net.attention_dim < 1) throw ConfigError("network sizes must be positive");
  if (!(c.net.popart_beta > 0.0 && c.net.popart_beta <= 1.0)) throw ConfigError("net.popart_beta must lie in (0, 1]");
  if (c.run.total_updates < 0 || c.run.checkpoint_interval < 1) {
    throw ConfigError("run.total_updates must be >= 0 and checkpoint_interval >= 1");
  }
}

nets::ModelConfig model_config(const HyperConfig& config) {
  auto env = env::make_env(config.env);
  nets::ModelConfig m;
  m.obs_dim = env->observation_dim();
  m.state_dim = env->state_dim();
  m.num_actions = env->num_actions();
  m.num_agents = env->num_agents();
  m.hidden = config.net.hidden;
  m.attention_dim = config.net.attention_dim;
  m.popart_beta = config.net.popart_beta;
  return m;
}

}  // namespace prd::app
