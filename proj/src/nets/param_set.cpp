#include "prd/nets/param_set.hpp"

#include <cmath>

#include "prd/common/errors.hpp"

namespace prd::nets {

ParamSet::ParamSet(const ParamSet& other) : params_(other.params_) {}

ParamSet& ParamSet::operator=(const ParamSet& other) {
  if (this != &other) params_ = other.params_;
  return *this;
}

Parameter& ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (contains(name)) throw ContractError("duplicate parameter name: " + name);
  Parameter p;
  p.name = std::move(name);
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return params_.back();
}

Parameter& ParamSet::at(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw ContractError("no parameter named " + std::string(name));
}

const Parameter& ParamSet::at(std::string_view name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

bool ParamSet::contains(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

Eigen::Index ParamSet::num_scalars() const {
  Eigen::Index n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Eigen::VectorXd ParamSet::flat_values() const {
  Eigen::VectorXd out(num_scalars());
  Eigen::Index offset = 0;
  for (const auto& p : params_) {
    out.segment(offset, p.value.size()) = p.value.reshaped();
    offset += p.value.size();
  }
  return out;
}

Eigen::VectorXd ParamSet::flat_grads() const {
  Eigen::VectorXd out(num_scalars());
  Eigen::Index offset = 0;
  for (const auto& p : params_) {
    if (p.grad.size() == p.value.size()) {
      out.segment(offset, p.value.size()) = p.grad.reshaped();
    } else {
      out.segment(offset, p.value.size()).setZero();
    }
    offset += p.value.size();
  }
  return out;
}

void ParamSet::set_flat_values(const Eigen::VectorXd& flat) {
  if (flat.size() != num_scalars()) throw ContractError("set_flat_values: size mismatch");
  Eigen::Index offset = 0;
  for (auto& p : params_) {
    p.value.reshaped() = flat.segment(offset, p.value.size());
    offset += p.value.size();
  }
}

double ParamSet::grad_norm() const {
  double total = 0.0;
  for (const auto& p : params_) {
    if (p.grad.size() == p.value.size()) total += p.grad.squaredNorm();
  }
  return std::sqrt(total);
}

}  // namespace prd::nets
