#include "prd/nets/popart.hpp"

#include <algorithm>
#include <cmath>

#include "prd/common/errors.hpp"

namespace prd::nets {

PopArt::PopArt(double beta, double sigma_min) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("popart beta must lie in (0, 1]");
  if (!(sigma_min > 0.0)) throw ConfigError("popart sigma_min must be positive");
  stats_.beta = beta;
  stats_.sigma_min = sigma_min;
}

double PopArt::mean() const {
  return stats_.debias > 0.0 ? stats_.mean_ema / stats_.debias : 0.0;
}

double PopArt::stddev() const {
  if (stats_.debias <= 0.0) return 1.0;
  const double m = mean();
  const double var = stats_.second_ema / stats_.debias - m * m;
  return std::sqrt(std::max(var, stats_.sigma_min * stats_.sigma_min));
}

Eigen::MatrixXd PopArt::normalize(const Eigen::MatrixXd& y) const {
  return ((y.array() - mean()) / stddev()).matrix();
}

Eigen::MatrixXd PopArt::denormalize(const Eigen::MatrixXd& z) const {
  return (z.array() * stddev() + mean()).matrix();
}

void PopArt::update(const Eigen::MatrixXd& targets, ad::Parameter& head_w, ad::Parameter& head_b) {
  if (targets.size() == 0) throw ContractError("popart update needs at least one target");
  const double old_mean = mean();
  const double old_std = stddev();
  const double b = stats_.beta;
  stats_.mean_ema = (1.0 - b) * stats_.mean_ema + b * targets.mean();
  stats_.second_ema = (1.0 - b) * stats_.second_ema + b * targets.array().square().mean();
  stats_.debias = (1.0 - b) * stats_.debias + b;
  stats_.count += targets.size();
  const double new_mean = mean();
  const double new_std = stddev();
  head_w.value *= old_std / new_std;
  head_b.value = ((old_std * head_b.value.array() + old_mean - new_mean) / new_std).matrix();
}

}  // namespace prd::nets
