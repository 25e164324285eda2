#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "prd/rollout/rollout.hpp"

namespace prd::advantage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A_t = sum_l (gamma lambda)^l delta_{t+l}, by the backward recursion.
Vector gae(std::span<const double> deltas, double gamma, double lambda);

// (sum_j r_j) + gamma v_next - v_t.
double delta_group(const Vector& rewards, double v_t, double v_next, double gamma);
// (sum_j omega_i(j) r_j) + gamma v_next - v_t. With an all-ones row this is
// bit-identical to delta_group.
double delta_prd(const Vector& rewards, const Eigen::Ref<const Eigen::RowVectorXd>& omega_row,
                 double v_t, double v_next, double gamma);

// T x M discounted returns G(t, i) = sum_l gamma^l r_i(t + l) within the episode.
Matrix discounted_returns(const Matrix& rewards, double gamma);

// Gbar(t, i) = sum_j omega_t(i, j) G(t, j).
Matrix relevant_returns(const Matrix& returns, const std::vector<Matrix>& omegas);

// Per column: GAE over r + gamma v_next - v, plus v. The last row bootstraps
// from `bootstrap`. rewards and values are T x K.
Matrix lambda_returns(const Matrix& rewards, const Matrix& values, const Vector& bootstrap, double gamma,
                      double lambda);

// Zero mean, unit variance (std clamped at 1e-8) over the entries.
Vector normalize(const Vector& values);

// Advantages and regression targets of one episode, T x M each.
struct EpisodeTargets {
  Matrix advantages;
  Matrix returns;           // G_i, Monte Carlo within the episode
  Matrix relevant_returns;  // Gbar_i, Monte Carlo within the episode
  // Raw advantage plus V_i(s_t, a_t^{-i}): the V-critic regression target.
  Matrix value_targets;
};

// rewards: T x M per-agent rewards used for credit; omegas: per-step M x M
// relevance weights; values: T x M V_i(s_t, a_t^{-i}); bootstrap: V_i after
// the last step (zeros on termination).
EpisodeTargets episode_targets(const Matrix& rewards, const std::vector<Matrix>& omegas,
                               const Matrix& values, const Vector& bootstrap, double gamma,
                               double lambda);

// MAPPO targets: group-summed rewards in every agent's TD residual, so every
// agent's value target follows the group return.
EpisodeTargets episode_targets_group(const Matrix& rewards, const Matrix& values,
                                     const Vector& bootstrap, double gamma, double lambda);

// Per-agent normalization of advantages across a batch of episodes (in place).
void normalize_per_agent(std::vector<EpisodeTargets>& batch);

}  // namespace prd::advantage
