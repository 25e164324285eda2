#pragma once

#include <deque>
#include <string>
#include <string_view>
#include <vector>

#include "prd/ad/tape.hpp"

namespace prd::nets {

using ad::Matrix;
using ad::Parameter;

// Ordered collection of named parameters with stable addresses.
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other);
  ParamSet& operator=(const ParamSet& other);
  ParamSet(ParamSet&&) = default;
  ParamSet& operator=(ParamSet&&) = default;

  // Adds a zero-initialized parameter. Names must be unique.
  Parameter& add(std::string name, Eigen::Index rows, Eigen::Index cols);

  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Total number of scalars.
  Eigen::Index num_scalars() const;

  void zero_grad();
  // Concatenation in insertion order, column-major within each tensor.
  Eigen::VectorXd flat_values() const;
  Eigen::VectorXd flat_grads() const;
  void set_flat_values(const Eigen::VectorXd& flat);
  double grad_norm() const;

 private:
  std::deque<Parameter> params_;
};

}  // namespace prd::nets
