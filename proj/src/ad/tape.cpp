#include "prd/ad/tape.hpp"

#include "prd/common/errors.hpp"

namespace prd::ad {

const Matrix& Var::value() const { return tape_->value(id_); }

Matrix Var::grad() const {
  if (tape_->has_grad(id_)) return tape_->grad(id_);
  return Matrix::Zero(rows(), cols());
}

const Matrix& Tape::value(int id) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  return node.external != nullptr ? *node.external : node.value;
}

Matrix& Tape::grad(int id) {
  Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.grad.size() == 0) {
    const Matrix& v = node.external != nullptr ? *node.external : node.value;
    node.grad.setZero(v.rows(), v.cols());
  }
  return node.grad;
}

Var Tape::make(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  return make(std::move(node));
}

Var Tape::leaf(Matrix value) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = record_;
  return make(std::move(node));
}

Var Tape::param(Parameter& parameter) {
  Node node;
  node.external = &parameter.value;
  node.parameter = &parameter;
  node.needs_grad = record_;
  return make(std::move(node));
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (in.tape_ != this) throw ContractError("op mixes nodes from different tapes");
      if (needs_grad(in.id_)) node.needs_grad = true;
    }
    if (node.needs_grad) node.backward = std::move(backward);
  }
  return make(std::move(node));
}

void Tape::backward(Var loss) {
  if (!record_) throw UsageError("backward() on a non-recording tape");
  if (loss.tape_ != this) throw ContractError("backward() target belongs to another tape");
  const Matrix& lv = value(loss.id_);
  if (lv.rows() != 1 || lv.cols() != 1) throw ContractError("backward() needs a 1x1 loss");
  for (auto& node : nodes_) node.grad.resize(0, 0);
  grad(loss.id_)(0, 0) = 1.0;
  for (int id = loss.id_; id >= 0; --id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.grad.size() == 0) continue;
    if (node.backward) node.backward(*this, id);
  }
  for (auto& node : nodes_) {
    if (node.parameter == nullptr || node.grad.size() == 0) continue;
    Parameter& p = *node.parameter;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
    p.grad += node.grad;
  }
}

}  // namespace prd::ad
