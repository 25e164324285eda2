#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prd/env/factory.hpp"
#include "prd/nets/model.hpp"
#include "prd/optimize/trainer.hpp"
#include "prd/rollout/rollout.hpp"

namespace prd::analysis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---- gradient variance ----

struct VarianceReport {
  std::string checkpoint;
  int batches = 0;
  double variance = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Trace of the sample covariance (n - 1 denominator) of the gradient vectors.
double trace_covariance(const std::vector<Vector>& gradients);

// Percentile bootstrap interval for trace_covariance, widened if needed so it
// contains the point estimate.
std::pair<double, double> bootstrap_interval(const std::vector<Vector>& gradients, int resamples,
                                             double level, std::uint64_t seed);

// K independent batches from the same policy (batch b uses episode indices
// starting at b * batch_size).
std::vector<std::vector<rollout::Trajectory>> collect_batches(const env::EnvFactory& factory,
                                                              nets::Model& model, int num_batches,
                                                              int batch_size, std::uint64_t seed);

// Flattened policy gradient of the first-epoch surrogate (ratio 1) on one
// batch, entropy term excluded.
Vector surrogate_gradient(nets::Model& model, const std::vector<rollout::Trajectory>& batch,
                          const optimize::AlgoConfig& algo, int chunk_length, long long update_index);

VarianceReport gradient_variance(nets::Model& model,
                                 const std::vector<std::vector<rollout::Trajectory>>& batches,
                                 const optimize::AlgoConfig& algo, int chunk_length, long long update_index,
                                 std::uint64_t seed);

std::string variance_csv(const std::vector<VarianceReport>& reports);

// ---- attention ----

struct AttentionSummary {
  Matrix mean;  // M x M, diagonal 1
  long long episodes = 0;
  long long steps = 0;
};

// Average of the Q critic's attention over every step of num_episodes episodes.
AttentionSummary attention_summary(const env::EnvFactory& factory, nets::Model& model, int num_episodes,
                                   int batch_size, bool greedy, std::uint64_t seed);

// Mean off-diagonal weight between agents on the same team and on different teams.
struct TeamContrast {
  double intra = 0.0;
  double cross = 0.0;
};
TeamContrast team_contrast(const Matrix& attention, const std::vector<int>& team_ids);

// Rows i,j,weight for every ordered pair; the diagonal's weight is left empty.
std::string attention_csv(const AttentionSummary& summary);

// ---- reward curves ----

struct RewardCurve {
  std::vector<double> mean;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  // True when runs had different lengths and were cut to the shortest.
  bool truncated = false;
};

// Per-episode mean across runs with a normal-approximation 95% interval
// (mean +- 1.96 sd / sqrt(n)). Needs at least two runs.
RewardCurve reward_stats(const std::vector<std::vector<double>>& runs);

std::string reward_csv(const RewardCurve& curve);

// Reads the `return` column of a returns.csv written by training.
std::vector<double> read_returns(const std::string& path);

}  // namespace prd::analysis
