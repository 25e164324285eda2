#pragma once

#include <vector>

#include "prd/nets/param_set.hpp"

namespace prd::optimize {

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
  double weight_decay = 0.0;
  // Global gradient-norm clip; <= 0 disables clipping.
  double max_grad_norm = 10.0;
};

// Adaptive-moment optimizer with decoupled weight decay over one ParamSet.
//
// step(): rescale gradients to global norm <= max_grad_norm, then
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2,
//   p *= 1 - lr wd,  p -= lr (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps).
class AdamW {
 public:
  AdamW(nets::ParamSet& params, AdamConfig config);

  // Applies one update from the accumulated gradients and returns the global
  // gradient norm before clipping. Throws NumericalError on non-finite gradients.
  double step();

  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  long long steps() const { return t_; }

 private:
  nets::ParamSet* params_;
  AdamConfig config_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  long long t_ = 0;
};

}  // namespace prd::optimize
