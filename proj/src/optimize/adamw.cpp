#include "prd/optimize/adamw.hpp"

#include <cmath>

#include "prd/common/errors.hpp"

namespace prd::optimize {

AdamW::AdamW(nets::ParamSet& params, AdamConfig config) : params_(&params), config_(config) {
  if (config.lr < 0.0 || config.eps <= 0.0 || config.beta1 < 0.0 || config.beta1 >= 1.0 ||
      config.beta2 < 0.0 || config.beta2 >= 1.0 || config.weight_decay < 0.0) {
    throw ConfigError("invalid optimizer settings");
  }
  for (const auto& p : params) {
    m_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  }
}

double AdamW::step() {
  const double norm = params_->grad_norm();
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
  const double scale =
      (config_.max_grad_norm > 0.0 && norm > config_.max_grad_norm) ? config_.max_grad_norm / norm : 1.0;
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_->size(); ++k) {
    auto& p = (*params_)[k];
    if (p.grad.size() != p.value.size()) p.zero_grad();
    const Eigen::ArrayXXd g = p.grad.array() * scale;
    m_[k].array() = config_.beta1 * m_[k].array() + (1.0 - config_.beta1) * g;
    v_[k].array() = config_.beta2 * v_[k].array() + (1.0 - config_.beta2) * g.square();
    if (config_.weight_decay > 0.0) p.value *= 1.0 - config_.lr * config_.weight_decay;
    p.value.array() -= config_.lr * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + config_.eps);
  }
  return norm;
}

}  // namespace prd::optimize
