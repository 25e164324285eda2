#include "prd/nets/model.hpp"

namespace prd::nets {

namespace {

CriticConfig critic_config(const ModelConfig& config, CriticKind kind) {
  CriticConfig c;
  c.kind = kind;
  c.state_dim = config.state_dim;
  c.num_actions = config.num_actions;
  c.num_agents = config.num_agents;
  c.hidden = config.hidden;
  c.attention_dim = config.attention_dim;
  c.popart_beta = config.popart_beta;
  return c;
}

}  // namespace

Model make_model(const ModelConfig& config, std::uint64_t seed) {
  Rng policy_rng(derive_seed(seed, "init.policy"));
  Rng q_rng(derive_seed(seed, "init.q"));
  Rng v_rng(derive_seed(seed, "init.v"));
  PolicyConfig pc{config.obs_dim, config.num_actions, config.hidden};
  return Model{config, Policy(pc, policy_rng), Critic(critic_config(config, CriticKind::kQ), q_rng),
               Critic(critic_config(config, CriticKind::kV), v_rng)};
}

}  // namespace prd::nets
