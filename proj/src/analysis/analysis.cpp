#include "prd/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "prd/common/errors.hpp"
#include "prd/common/io.hpp"
#include "prd/common/random.hpp"

namespace prd::analysis {

double trace_covariance(const std::vector<Vector>& gradients) {
  if (gradients.size() < 2) throw ConfigError("variance needs at least two gradient samples");
  const Eigen::Index dim = gradients.front().size();
  Vector mean = Vector::Zero(dim);
  for (const auto& g : gradients) {
    if (g.size() != dim) throw ContractError("gradient vectors differ in length");
    mean += g;
  }
  mean /= static_cast<double>(gradients.size());
  double total = 0.0;
  for (const auto& g : gradients) total += (g - mean).squaredNorm();
  return total / static_cast<double>(gradients.size() - 1);
}

std::pair<double, double> bootstrap_interval(const std::vector<Vector>& gradients, int resamples,
                                             double level, std::uint64_t seed) {
  const double estimate = trace_covariance(gradients);
  const auto n = static_cast<Eigen::Index>(gradients.size());
  // With counts c: sum_k c_k |g_k|^2 - |sum_k c_k g_k|^2 / n, from the Gram matrix.
  Matrix gram(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      gram(a, b) = gram(b, a) = gradients[static_cast<std::size_t>(a)].dot(gradients[static_cast<std::size_t>(b)]);
    }
  }
  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  Vector counts(n);
  for (int r = 0; r < resamples; ++r) {
    counts.setZero();
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto pick = std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
      counts(pick) += 1.0;
    }
    const double spread = counts.dot(gram.diagonal()) - counts.dot(gram * counts) / static_cast<double>(n);
    stats.push_back(std::max(spread, 0.0) / static_cast<double>(n - 1));
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, stats.size() - 1);
    return stats[lo] + (pos - static_cast<double>(lo)) * (stats[hi] - stats[lo]);
  };
  return {std::min(quantile(tail), estimate), std::max(quantile(1.0 - tail), estimate)};
}

std::vector<std::vector<rollout::Trajectory>> collect_batches(const env::EnvFactory& factory,
                                                              nets::Model& model, int num_batches,
                                                              int batch_size, std::uint64_t seed) {
  std::vector<std::vector<rollout::Trajectory>> out;
  for (int b = 0; b < num_batches; ++b) {
    rollout::CollectOptions options;
    options.batch_size = batch_size;
    options.first_episode = static_cast<std::uint64_t>(b) * static_cast<std::uint64_t>(batch_size);
    out.push_back(rollout::collect(factory, model, options, seed));
  }
  return out;
}

Vector surrogate_gradient(nets::Model& model, const std::vector<rollout::Trajectory>& batch,
                          const optimize::AlgoConfig& algo, int chunk_length, long long update_index) {
  const optimize::PreparedBatch prepared = optimize::prepare_batch(batch, algo, update_index);
  const auto chunks = optimize::make_chunks(batch, chunk_length);
  const optimize::ReplayBatch replay = optimize::build_replay(batch, prepared, chunks, chunk_length, model,
                                                              algo.credit.strategy == credit::Strategy::kShared);
  ad::Tape tape;
  optimize::PolicyLossTerms terms = optimize::policy_loss(model.policy, tape, replay, 0.2, 0.0);
  model.policy.params().zero_grad();
  tape.backward(terms.loss);
  return model.policy.params().flat_grads();
}

VarianceReport gradient_variance(nets::Model& model,
                                 const std::vector<std::vector<rollout::Trajectory>>& batches,
                                 const optimize::AlgoConfig& algo, int chunk_length, long long update_index,
                                 std::uint64_t seed) {
  std::vector<Vector> grads;
  grads.reserve(batches.size());
  for (const auto& batch : batches) {
    grads.push_back(surrogate_gradient(model, batch, algo, chunk_length, update_index));
  }
  VarianceReport report;
  report.batches = static_cast<int>(batches.size());
  report.variance = trace_covariance(grads);
  std::tie(report.ci_lo, report.ci_hi) = bootstrap_interval(grads, 1000, 0.95, seed);
  return report;
}

std::string variance_csv(const std::vector<VarianceReport>& reports) {
  CsvTable table;
  table.header = {"checkpoint", "K", "variance", "ci_lo", "ci_hi"};
  for (const auto& r : reports) {
    table.rows.push_back({r.checkpoint, std::to_string(r.batches), format_double(r.variance),
                          format_double(r.ci_lo), format_double(r.ci_hi)});
  }
  return to_csv(table);
}

AttentionSummary attention_summary(const env::EnvFactory& factory, nets::Model& model, int num_episodes,
                                   int batch_size, bool greedy, std::uint64_t seed) {
  if (num_episodes < 1 || batch_size < 1) throw ConfigError("attention summary needs episodes");
  const int m = model.config.num_agents;
  AttentionSummary out;
  Matrix total = Matrix::Zero(m, m);
  for (int first = 0; first < num_episodes; first += batch_size) {
    rollout::CollectOptions options;
    options.batch_size = std::min(batch_size, num_episodes - first);
    options.evaluate_v = false;
    options.greedy = greedy;
    options.first_episode = static_cast<std::uint64_t>(first);
    for (const auto& traj : rollout::collect(factory, model, options, seed)) {
      for (const auto& s : traj.steps) {
        total += s.attention;
        ++out.steps;
      }
      ++out.episodes;
    }
  }
  out.mean = out.steps > 0 ? Matrix(total / static_cast<double>(out.steps)) : Matrix(Matrix::Identity(m, m));
  out.mean.diagonal().setOnes();
  return out;
}

TeamContrast team_contrast(const Matrix& attention, const std::vector<int>& team_ids) {
  double intra = 0.0, cross = 0.0;
  int n_intra = 0, n_cross = 0;
  for (Eigen::Index i = 0; i < attention.rows(); ++i) {
    for (Eigen::Index j = 0; j < attention.cols(); ++j) {
      if (i == j) continue;
      if (team_ids[static_cast<std::size_t>(i)] == team_ids[static_cast<std::size_t>(j)]) {
        intra += attention(i, j);
        ++n_intra;
      } else {
        cross += attention(i, j);
        ++n_cross;
      }
    }
  }
  return {n_intra > 0 ? intra / n_intra : 0.0, n_cross > 0 ? cross / n_cross : 0.0};
}

std::string attention_csv(const AttentionSummary& summary) {
  CsvTable table;
  table.header = {"i", "j", "weight"};
  for (Eigen::Index i = 0; i < summary.mean.rows(); ++i) {
    for (Eigen::Index j = 0; j < summary.mean.cols(); ++j) {
      table.rows.push_back({std::to_string(i), std::to_string(j), i == j ? "" : format_double(summary.mean(i, j))});
    }
  }
  return to_csv(table);
}

RewardCurve reward_stats(const std::vector<std::vector<double>>& runs) {
  if (runs.size() < 2) throw ConfigError("reward statistics need at least two runs");
  std::size_t length = runs.front().size();
  for (const auto& r : runs) length = std::min(length, r.size());
  RewardCurve curve;
  for (const auto& r : runs) curve.truncated = curve.truncated || r.size() != length;
  const double n = static_cast<double>(runs.size());
  for (std::size_t e = 0; e < length; ++e) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r[e];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& r : runs) sq += (r[e] - mean) * (r[e] - mean);
    const double half = 1.96 * std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
    curve.mean.push_back(mean);
    curve.ci_lo.push_back(mean - half);
    curve.ci_hi.push_back(mean + half);
  }
  return curve;
}

std::string reward_csv(const RewardCurve& curve) {
  CsvTable table;
  table.header = {"episode", "mean", "ci_lo", "ci_hi"};
  for (std::size_t e = 0; e < curve.mean.size(); ++e) {
    table.rows.push_back({std::to_string(e), format_double(curve.mean[e]), format_double(curve.ci_lo[e]),
                          format_double(curve.ci_hi[e])});
  }
  return to_csv(table);
}

std::vector<double> read_returns(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("returns log not found: " + path);
  const CsvTable table = parse_csv(read_file(path));
  std::size_t col = 0;
  try {
    col = table.column("return");
  } catch (const std::out_of_range&) {
    throw ConfigError(path + " has no 'return' column");
  }
  std::vector<double> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) out.push_back(std::stod(row.at(col)));
  return out;
}

}  // namespace prd::analysis
