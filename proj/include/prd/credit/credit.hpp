#pragma once

#include <string>

#include <Eigen/Dense>

namespace prd::credit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Reward-weighting strategy. kNone is plain MAPPO (every agent relevant).
enum class Strategy { kNone, kHard, kSoft, kTopK, kAscend, kDecay, kShared };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& text);

enum class ScheduleKind { kConstant, kAscend, kDecay };

struct ThresholdSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double epsilon = 0.0;  // constant threshold
  double theta = 0.0;    // ramp target
  int ramp = 1;          // N policy updates
};

// constant: epsilon; ascend: theta * min(u / N, 1); decay: theta * max(1 - u / N, 0).
double schedule_epsilon(const ThresholdSchedule& schedule, long long update_index);

struct CreditConfig {
  Strategy strategy = Strategy::kSoft;
  double epsilon = 0.12;
  double theta = 0.12;
  int ramp = 1000;
  int k = 1;
};

// Threshold in effect at a given update (0 for strategies that do not threshold).
double epsilon_at(const CreditConfig& config, long long update_index);

// Throws ConfigError for unusable settings given the number of agents.
void validate(const CreditConfig& config, int num_agents);

// In all functions below W is M x M with W(i, j) the weight observer i's critic
// gives agent j, unit diagonal. The returned Omega(i, j) weights agent j's
// reward inside agent i's advantage, so agent i's relevant set is read off
// column i of W.

// Omega(i, j) = 1 iff W(j, i) >= epsilon; diagonal 1.
Matrix relevant_mask(const Matrix& w, double epsilon);
// Omega = W^T with diagonal 1.
Matrix soft_weights(const Matrix& w);
// Per column i of W, the k largest off-diagonal entries (ties: lower index) plus self.
Matrix top_k_mask(const Matrix& w, int k);
// All ones (every agent's reward counts for every agent).
Matrix all_ones(int num_agents);

// Splits a shared reward r into per-agent rewards proportional to the column
// means of W (diagonal included). The parts sum to r.
Vector shared_decompose(const Matrix& w, double shared_reward);

// Omega for one timestep under the configured strategy.
Matrix relevance(const CreditConfig& config, const Matrix& w, long long update_index);

}  // namespace prd::credit
