#include "prd/advantage/advantage.hpp"

#include <algorithm>
#include <cmath>

#include "prd/common/errors.hpp"

namespace prd::advantage {

Vector gae(std::span<const double> deltas, double gamma, double lambda) {
  const auto n = static_cast<Eigen::Index>(deltas.size());
  Vector out(n);
  double running = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    running = deltas[static_cast<std::size_t>(t)] + gamma * lambda * running;
    out(t) = running;
  }
  return out;
}

double delta_group(const Vector& rewards, double v_t, double v_next, double gamma) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < rewards.size(); ++j) total += rewards(j);
  return total + gamma * v_next - v_t;
}

double delta_prd(const Vector& rewards, const Eigen::Ref<const Eigen::RowVectorXd>& omega_row,
                 double v_t, double v_next, double gamma) {
  if (omega_row.size() != rewards.size()) throw ContractError("delta_prd: omega row length mismatch");
  double total = 0.0;
  for (Eigen::Index j = 0; j < rewards.size(); ++j) total += omega_row(j) * rewards(j);
  return total + gamma * v_next - v_t;
}

Matrix discounted_returns(const Matrix& rewards, double gamma) {
  Matrix out(rewards.rows(), rewards.cols());
  for (Eigen::Index i = 0; i < rewards.cols(); ++i) {
    double running = 0.0;
    for (Eigen::Index t = rewards.rows() - 1; t >= 0; --t) {
      running = rewards(t, i) + gamma * running;
      out(t, i) = running;
    }
  }
  return out;
}

Matrix relevant_returns(const Matrix& returns, const std::vector<Matrix>& omegas) {
  if (static_cast<Eigen::Index>(omegas.size()) != returns.rows()) {
    throw ContractError("relevant_returns: one omega per timestep required");
  }
  const Eigen::Index m = returns.cols();
  Matrix out(returns.rows(), m);
  for (Eigen::Index t = 0; t < returns.rows(); ++t) {
    const Matrix& omega = omegas[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < m; ++i) {
      double total = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) total += omega(i, j) * returns(t, j);
      out(t, i) = total;
    }
  }
  return out;
}

Matrix lambda_returns(const Matrix& rewards, const Matrix& values, const Vector& bootstrap, double gamma,
                      double lambda) {
  const Eigen::Index steps = rewards.rows();
  if (values.rows() != steps || values.cols() != rewards.cols() || bootstrap.size() != rewards.cols()) {
    throw ContractError("lambda_returns: inconsistent shapes");
  }
  Matrix out(steps, rewards.cols());
  std::vector<double> deltas(static_cast<std::size_t>(steps));
  for (Eigen::Index i = 0; i < rewards.cols(); ++i) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      const double v_next = t + 1 < steps ? values(t + 1, i) : bootstrap(i);
      deltas[static_cast<std::size_t>(t)] = rewards(t, i) + gamma * v_next - values(t, i);
    }
    out.col(i) = gae(deltas, gamma, lambda) + values.col(i);
  }
  return out;
}

Vector normalize(const Vector& values) {
  if (values.size() == 0) throw ContractError("normalize: empty batch");
  const double mean = values.mean();
  const double var = (values.array() - mean).square().mean();
  const double stddev = std::max(std::sqrt(var), 1e-8);
  return ((values.array() - mean) / stddev).matrix();
}

EpisodeTargets episode_targets(const Matrix& rewards, const std::vector<Matrix>& omegas,
                               const Matrix& values, const Vector& bootstrap, double gamma,
                               double lambda) {
  const Eigen::Index steps = rewards.rows();
  const Eigen::Index m = rewards.cols();
  if (values.rows() != steps || values.cols() != m || bootstrap.size() != m ||
      static_cast<Eigen::Index>(omegas.size()) != steps) {
    throw ContractError("episode_targets: inconsistent shapes");
  }
  EpisodeTargets out;
  out.returns = discounted_returns(rewards, gamma);
  out.relevant_returns = relevant_returns(out.returns, omegas);
  out.advantages.resize(steps, m);
  std::vector<double> deltas(static_cast<std::size_t>(steps));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      const double v_next = t + 1 < steps ? values(t + 1, i) : bootstrap(i);
      const Vector r = rewards.row(t).transpose();
      deltas[static_cast<std::size_t>(t)] =
          delta_prd(r, omegas[static_cast<std::size_t>(t)].row(i), values(t, i), v_next, gamma);
    }
    out.advantages.col(i) = gae(deltas, gamma, lambda);
  }
  out.value_targets = out.advantages + values;
  return out;
}

EpisodeTargets episode_targets_group(const Matrix& rewards, const Matrix& values,
                                     const Vector& bootstrap, double gamma, double lambda) {
  const Eigen::Index steps = rewards.rows();
  const Eigen::Index m = rewards.cols();
  if (values.rows() != steps || values.cols() != m || bootstrap.size() != m) {
    throw ContractError("episode_targets_group: inconsistent shapes");
  }
  EpisodeTargets out;
  out.returns = discounted_returns(rewards, gamma);
  out.relevant_returns.resize(steps, m);
  for (Eigen::Index t = 0; t < steps; ++t) {
    double group = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) group += out.returns(t, j);
    out.relevant_returns.row(t).setConstant(group);
  }
  out.advantages.resize(steps, m);
  std::vector<double> deltas(static_cast<std::size_t>(steps));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index t = 0; t < steps; ++t) {
      const double v_next = t + 1 < steps ? values(t + 1, i) : bootstrap(i);
      deltas[static_cast<std::size_t>(t)] = delta_group(rewards.row(t).transpose(), values(t, i), v_next, gamma);
    }
    out.advantages.col(i) = gae(deltas, gamma, lambda);
  }
  out.value_targets = out.advantages + values;
  return out;
}

void normalize_per_agent(std::vector<EpisodeTargets>& batch) {
  if (batch.empty()) return;
  const Eigen::Index m = batch.front().advantages.cols();
  Eigen::Index total = 0;
  for (const auto& e : batch) total += e.advantages.rows();
  if (total == 0) return;
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector all(total);
    Eigen::Index k = 0;
    for (const auto& e : batch) {
      all.segment(k, e.advantages.rows()) = e.advantages.col(i);
      k += e.advantages.rows();
    }
    const Vector normed = normalize(all);
    k = 0;
    for (auto& e : batch) {
      e.advantages.col(i) = normed.segment(k, e.advantages.rows());
      k += e.advantages.rows();
    }
  }
}

}  // namespace prd::advantage
