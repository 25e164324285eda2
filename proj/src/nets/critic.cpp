#include "prd/nets/critic.hpp"

#include <string>

#include "prd/common/errors.hpp"
#include "prd/nets/init.hpp"

namespace prd::nets {

Matrix one_hot(const std::vector<int>& actions, int num_actions) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    if (actions[r] < 0 || actions[r] >= num_actions) {
      throw ContractError("action index " + std::to_string(actions[r]) + " out of range");
    }
    out(static_cast<Eigen::Index>(r), actions[r]) = 1.0;
  }
  return out;
}

Critic::Critic(const CriticConfig& config, Rng& rng)
    : config_(config), popart_(config.popart_beta) {
  if (config.state_dim < 1 || config.num_actions < 1 || config.hidden < 1 ||
      config.attention_dim < 1) {
    throw ConfigError("critic dimensions must be positive");
  }
  if (config.num_agents < 2) throw ConfigError("attention critic needs at least two agents");
  const int h = config.hidden;
  const int ds = config.state_dim;
  const int da = config.num_actions;
  const int own_in = config.kind == CriticKind::kQ ? ds + da : ds;
  params_.add("state.w", ds, h).value = orthogonal(ds, h, 1.0, rng);
  params_.add("state.b", 1, h);
  params_.add("query.w", h, config.attention_dim).value = orthogonal(h, config.attention_dim, 1.0, rng);
  params_.add("key.w", h, config.attention_dim).value = orthogonal(h, config.attention_dim, 1.0, rng);
  params_.add("value.w", ds + da, h).value = orthogonal(ds + da, h, 1.0, rng);
  params_.add("value.b", 1, h);
  params_.add("own.w", own_in, h).value = orthogonal(own_in, h, 1.0, rng);
  params_.add("own.b", 1, h);
  params_.add("gru.wx", 2 * h, 3 * h).value = orthogonal(2 * h, 3 * h, 1.0, rng);
  params_.add("gru.bx", 1, 3 * h);
  params_.add("gru.wh", h, 3 * h).value = orthogonal(h, 3 * h, 1.0, rng);
  params_.add("gru.bh", 1, 3 * h);
  params_.add("head.w", h, 1).value = orthogonal(h, 1, 1.0, rng);
  params_.add("head.b", 1, 1);
}

Critic::Bound Critic::bind(Tape& tape) {
  auto p = [&](const char* name) { return tape.param(params_.at(name)); };
  return Bound{p("state.w"), p("state.b"), p("query.w"), p("key.w"),  p("value.w"),
               p("value.b"), p("own.w"),   p("own.b"),   p("gru.wx"), p("gru.bx"),
               p("gru.wh"),  p("gru.bh"),  p("head.w"),  p("head.b")};
}

Critic::Output Critic::step(const Bound& bound, const Matrix& states, const std::vector<int>& actions,
                            Var hidden, const Matrix* blocked) const {
  const Eigen::Index rows = states.rows();
  if (states.cols() != config_.state_dim) {
    throw ContractError("critic: state width " + std::to_string(states.cols()) + ", expected " +
                        std::to_string(config_.state_dim));
  }
  if (rows % config_.num_agents != 0 || static_cast<Eigen::Index>(actions.size()) != rows) {
    throw ContractError("critic: rows must be whole groups of agents with one action each");
  }
  if (hidden.rows() != rows || hidden.cols() != config_.hidden) {
    throw ContractError("critic: hidden state shape mismatch");
  }
  Tape& tape = hidden.tape();
  Matrix state_action(rows, config_.state_dim + config_.num_actions);
  state_action << states, one_hot(actions, config_.num_actions);
  Var s = tape.constant(states);
  Var sa = tape.constant(state_action);

  Var embed = ad::tanh(ad::add_row(ad::matmul(s, bound.w_s), bound.b_s));
  Var query = ad::matmul(embed, bound.w_q);
  Var key = ad::matmul(embed, bound.w_k);
  Var value = ad::tanh(ad::add_row(ad::matmul(sa, bound.w_v), bound.b_v));
  Var own_in = config_.kind == CriticKind::kQ ? sa : s;
  Var own = ad::tanh(ad::add_row(ad::matmul(own_in, bound.w_o), bound.b_o));
  ad::AttentionResult att = ad::grouped_attention(query, key, value, config_.num_agents, blocked);

  Var x = ad::concat_cols(own, att.aggregated);
  Var gx = ad::add_row(ad::matmul(x, bound.w_x), bound.b_x);
  Var gh = ad::add_row(ad::matmul(hidden, bound.w_h), bound.b_h);
  Var h = ad::gru_cell(gx, gh, hidden);
  Var out = ad::add_row(ad::matmul(h, bound.w_out), bound.b_out);
  evaluations_ += static_cast<std::uint64_t>(rows);
  return Output{out, std::move(att.weights), h};
}

void Critic::update_popart(const Matrix& targets) {
  popart_.update(targets, params_.at("head.w"), params_.at("head.b"));
}

}  // namespace prd::nets
