#pragma once

#include <Eigen/Dense>

#include "prd/ad/tape.hpp"

namespace prd::nets {

// Running target statistics with bias-corrected exponential averages.
struct PopArtStats {
  double mean_ema = 0.0;
  double second_ema = 0.0;
  // Accumulated weight of the averages; the debiased mean is mean_ema / debias.
  double debias = 0.0;
  double beta = 0.01;
  double sigma_min = 1e-4;
  long long count = 0;
};

// Adaptive target normalization for a linear scalar output head.
class PopArt {
 public:
  PopArt() = default;
  explicit PopArt(double beta, double sigma_min = 1e-4);

  double mean() const;
  double stddev() const;

  double normalize(double y) const { return (y - mean()) / stddev(); }
  double denormalize(double z) const { return z * stddev() + mean(); }
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& y) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& z) const;

  // Folds a batch of targets into the statistics and rescales the head
  // (weights H x 1, bias 1 x 1) so denormalized outputs are unchanged.
  void update(const Eigen::MatrixXd& targets, ad::Parameter& head_w, ad::Parameter& head_b);

  const PopArtStats& stats() const { return stats_; }
  void set_stats(const PopArtStats& stats) { stats_ = stats; }

 private:
  PopArtStats stats_;
};

}  // namespace prd::nets
