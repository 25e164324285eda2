#pragma once

#include <vector>

#include "prd/ad/tape.hpp"
#include "prd/common/random.hpp"
#include "prd/nets/param_set.hpp"

namespace prd::nets {

using ad::Tape;
using ad::Var;

struct PolicyConfig {
  int obs_dim = 0;
  int num_actions = 0;
  int hidden = 64;
};

// Recurrent categorical policy shared by all agents.
//
// e = tanh(o W_in + b_in), h' = GRU(e, h), logits = h' W_out + b_out.
class Policy {
 public:
  Policy(const PolicyConfig& config, Rng& rng);

  struct Bound {
    Var w_in, b_in, w_x, b_x, w_h, b_h, w_out, b_out;
  };
  struct Output {
    Var log_probs;  // R x A
    Var hidden;     // R x H
  };

  Bound bind(Tape& tape);
  // One recurrent step for R rows (agents, possibly from several episodes).
  Output step(const Bound& bound, const Matrix& obs, Var hidden) const;

  const PolicyConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  PolicyConfig config_;
  ParamSet params_;
};

}  // namespace prd::nets
