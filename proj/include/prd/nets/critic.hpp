#pragma once

#include <cstdint>
#include <vector>

#include "prd/ad/tape.hpp"
#include "prd/common/random.hpp"
#include "prd/nets/param_set.hpp"
#include "prd/nets/popart.hpp"

namespace prd::nets {

using ad::Tape;
using ad::Var;

// kQ: observer branch sees its own state and action, output Q_i(s, a).
// kV: observer branch sees its own state only, output V_i(s, a^{-i}).
enum class CriticKind { kQ, kV };

struct CriticConfig {
  CriticKind kind = CriticKind::kQ;
  int state_dim = 0;
  int num_actions = 0;
  int num_agents = 0;
  int hidden = 64;
  int attention_dim = 64;
  double popart_beta = 0.01;
};

// Attention critic shared by all agents.
//
// Rows come in groups of num_agents (one group per episode). For observer i:
//   query/key from tanh(s W_s + b_s), value_j = tanh([s_j, a_j] W_v + b_v),
//   agg_i = sum_{j != i} w_ij value_j (softmax over j != i),
//   own_i = tanh(x_i W_o + b_o) with x_i = [s_i, a_i] (Q) or s_i (V),
//   h' = GRU([own_i, agg_i], h), out = h' W_out + b_out (PopArt-normalized).
class Critic {
 public:
  Critic(const CriticConfig& config, Rng& rng);

  struct Bound {
    Var w_s, b_s, w_q, w_k, w_v, b_v, w_o, b_o, w_x, b_x, w_h, b_h, w_out, b_out;
  };
  struct Output {
    Var values;        // R x 1, normalized scale
    Matrix attention;  // R x num_agents, diagonal 1
    Var hidden;        // R x H
  };

  Bound bind(Tape& tape);
  // `blocked` (R x num_agents, optional) forces the marked weights to exactly 0.
  Output step(const Bound& bound, const Matrix& states, const std::vector<int>& actions,
              Var hidden, const Matrix* blocked = nullptr) const;

  const CriticConfig& config() const { return config_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  PopArt& popart() { return popart_; }
  const PopArt& popart() const { return popart_; }
  // Rescales the output head after folding `targets` (original scale) into the statistics.
  void update_popart(const Matrix& targets);

  // Observer rows evaluated so far (one per agent per step() row).
  std::uint64_t evaluations() const { return evaluations_; }
  void reset_evaluations() { evaluations_ = 0; }

 private:
  CriticConfig config_;
  ParamSet params_;
  PopArt popart_;
  mutable std::uint64_t evaluations_ = 0;
};

// R x A one-hot encoding of actions.
Matrix one_hot(const std::vector<int>& actions, int num_actions);

}  // namespace prd::nets
