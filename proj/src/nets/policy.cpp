#include "prd/nets/policy.hpp"

#include <string>

#include "prd/common/errors.hpp"
#include "prd/nets/init.hpp"

namespace prd::nets {

Policy::Policy(const PolicyConfig& config, Rng& rng) : config_(config) {
  if (config.obs_dim < 1 || config.num_actions < 1 || config.hidden < 1) {
    throw ConfigError("policy dimensions must be positive");
  }
  const int h = config.hidden;
  params_.add("embed.w", config.obs_dim, h).value = orthogonal(config.obs_dim, h, 1.0, rng);
  params_.add("embed.b", 1, h);
  params_.add("gru.wx", h, 3 * h).value = orthogonal(h, 3 * h, 1.0, rng);
  params_.add("gru.bx", 1, 3 * h);
  params_.add("gru.wh", h, 3 * h).value = orthogonal(h, 3 * h, 1.0, rng);
  params_.add("gru.bh", 1, 3 * h);
  params_.add("head.w", h, config.num_actions).value = orthogonal(h, config.num_actions, 0.01, rng);
  params_.add("head.b", 1, config.num_actions);
}

Policy::Bound Policy::bind(Tape& tape) {
  auto p = [&](const char* name) { return tape.param(params_.at(name)); };
  return Bound{p("embed.w"), p("embed.b"), p("gru.wx"), p("gru.bx"),
               p("gru.wh"),  p("gru.bh"),  p("head.w"), p("head.b")};
}

Policy::Output Policy::step(const Bound& bound, const Matrix& obs, Var hidden) const {
  if (obs.cols() != config_.obs_dim) {
    throw ContractError("policy: observation width " + std::to_string(obs.cols()) + ", expected " +
                        std::to_string(config_.obs_dim));
  }
  if (hidden.rows() != obs.rows() || hidden.cols() != config_.hidden) {
    throw ContractError("policy: hidden state shape mismatch");
  }
  Tape& tape = hidden.tape();
  Var x = ad::tanh(ad::add_row(ad::matmul(tape.constant(obs), bound.w_in), bound.b_in));
  Var gx = ad::add_row(ad::matmul(x, bound.w_x), bound.b_x);
  Var gh = ad::add_row(ad::matmul(hidden, bound.w_h), bound.b_h);
  Var h = ad::gru_cell(gx, gh, hidden);
  Var logits = ad::add_row(ad::matmul(h, bound.w_out), bound.b_out);
  return Output{ad::log_softmax_rows(logits), h};
}

}  // namespace prd::nets
