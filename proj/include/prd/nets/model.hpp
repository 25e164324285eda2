#pragma once

#include <cstdint>

#include "prd/nets/critic.hpp"
#include "prd/nets/policy.hpp"

namespace prd::nets {

struct ModelConfig {
  int obs_dim = 0;
  int state_dim = 0;
  int num_actions = 0;
  int num_agents = 0;
  int hidden = 64;
  int attention_dim = 64;
  double popart_beta = 0.01;
};

// Policy plus the Q critic (relevance estimation) and V critic (baseline).
struct Model {
  ModelConfig config;
  Policy policy;
  Critic q;
  Critic v;
};

// Builds a freshly initialized model; each network draws from its own seed stream.
Model make_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace prd::nets
