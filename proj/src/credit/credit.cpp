#include "prd/credit/credit.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "prd/common/errors.hpp"

namespace prd::credit {

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kNone: return "none";
    case Strategy::kHard: return "hard";
    case Strategy::kSoft: return "soft";
    case Strategy::kTopK: return "topk";
    case Strategy::kAscend: return "ascend";
    case Strategy::kDecay: return "decay";
    case Strategy::kShared: return "shared";
  }
  return "none";
}

Strategy strategy_from_string(const std::string& text) {
  for (Strategy s : {Strategy::kNone, Strategy::kHard, Strategy::kSoft, Strategy::kTopK,
                     Strategy::kAscend, Strategy::kDecay, Strategy::kShared}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown credit strategy: " + text);
}

double schedule_epsilon(const ThresholdSchedule& schedule, long long update_index) {
  if (update_index < 0) throw ContractError("update index must be >= 0");
  const double progress = static_cast<double>(update_index) / static_cast<double>(std::max(schedule.ramp, 1));
  switch (schedule.kind) {
    case ScheduleKind::kConstant: return schedule.epsilon;
    case ScheduleKind::kAscend: return schedule.theta * std::min(progress, 1.0);
    case ScheduleKind::kDecay: return schedule.theta * std::max(1.0 - progress, 0.0);
  }
  return schedule.epsilon;
}

double epsilon_at(const CreditConfig& config, long long update_index) {
  switch (config.strategy) {
    case Strategy::kHard:
      return config.epsilon;
    case Strategy::kAscend:
      return schedule_epsilon({ScheduleKind::kAscend, 0.0, config.theta, config.ramp}, update_index);
    case Strategy::kDecay:
      return schedule_epsilon({ScheduleKind::kDecay, 0.0, config.theta, config.ramp}, update_index);
    default:
      return 0.0;
  }
}

void validate(const CreditConfig& config, int num_agents) {
  if (config.epsilon < 0.0 || config.theta < 0.0) throw ConfigError("prd thresholds must be >= 0");
  if ((config.strategy == Strategy::kAscend || config.strategy == Strategy::kDecay) && config.ramp < 1) {
    throw ConfigError("prd.N must be >= 1");
  }
  if (config.strategy == Strategy::kTopK && (config.k < 1 || config.k > num_agents - 1)) {
    throw ConfigError("prd.k must lie in [1, M-1]");
  }
}

Matrix relevant_mask(const Matrix& w, double epsilon) {
  const Eigen::Index m = w.rows();
  Matrix omega(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) omega(i, j) = (i == j || w(j, i) >= epsilon) ? 1.0 : 0.0;
  }
  return omega;
}

Matrix soft_weights(const Matrix& w) {
  Matrix omega = w.transpose();
  omega.diagonal().setOnes();
  return omega;
}

Matrix top_k_mask(const Matrix& w, int k) {
  const Eigen::Index m = w.rows();
  if (k < 1 || k > m - 1) throw ConfigError("top-k needs 1 <= k <= M-1");
  Matrix omega = Matrix::Identity(m, m);
  std::vector<Eigen::Index> others;
  for (Eigen::Index i = 0; i < m; ++i) {
    others.clear();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (j != i) others.push_back(j);
    }
    std::stable_sort(others.begin(), others.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return w(a, i) > w(b, i); });
    for (int r = 0; r < k; ++r) omega(i, others[static_cast<std::size_t>(r)]) = 1.0;
  }
  return omega;
}

Matrix all_ones(int num_agents) { return Matrix::Ones(num_agents, num_agents); }

Vector shared_decompose(const Matrix& w, double shared_reward) {
  const Eigen::Index m = w.cols();
  const Vector col_mean = w.colwise().mean().transpose();
  const double total = col_mean.sum();
  if (!(total > 0.0)) throw ContractError("shared_decompose: attention column means sum to zero");
  Vector parts(m);
  double assigned = 0.0;
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    parts(j) = shared_reward * col_mean(j) / total;
    assigned += parts(j);
  }
  // Remainder on the last agent keeps the sum equal to the shared reward.
  parts(m - 1) = shared_reward - assigned;
  return parts;
}

Matrix relevance(const CreditConfig& config, const Matrix& w, long long update_index) {
  switch (config.strategy) {
    case Strategy::kNone: return all_ones(static_cast<int>(w.rows()));
    case Strategy::kHard:
    case Strategy::kAscend:
    case Strategy::kDecay: return relevant_mask(w, epsilon_at(config, update_index));
    case Strategy::kSoft:
    case Strategy::kShared: return soft_weights(w);
    case Strategy::kTopK: return top_k_mask(w, config.k);
  }
  return all_ones(static_cast<int>(w.rows()));
}

}  // namespace prd::credit
