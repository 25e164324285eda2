#pragma once

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace prd::ad {

using Matrix = Eigen::MatrixXd;

// A named trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient of the last backward() target w.r.t. this node (zeros if unreached).
  Matrix grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Records a computation over matrices for reverse-mode differentiation.
//
// With recording disabled the tape only evaluates: no backward closures are
// stored and backward() is unavailable. Parameter nodes reference the
// parameter's storage directly; backward() adds their gradients into
// Parameter::grad.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  // Differentiable leaf not tied to a Parameter (inputs under test).
  Var leaf(Matrix value);
  Var param(Parameter& parameter);

  // Reverse sweep from a 1x1 node.
  void backward(Var loss);

  const Matrix& value(int id) const;
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  // Gradient buffer of a node, zero-initialized on first access.
  Matrix& grad(int id);
  bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() > 0; }
  std::size_t size() const { return nodes_.size(); }

  // Appends an op result. `backward` runs only if some input needs a gradient.
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward);

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    Parameter* parameter = nullptr;
    Backward backward;
    bool needs_grad = false;
  };

  Var make(Node node);

  std::deque<Node> nodes_;
  bool record_;
};

// ---- elementwise / linear algebra ----
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
// a (R x C) plus a 1 x C row broadcast to every row.
Var add_row(Var a, Var row);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var concat_cols(Var a, Var b);

// ---- reductions ----
Var sum(Var a);
// sum(weights .* a) for a constant weight matrix of the same shape.
Var weighted_sum(Var a, const Matrix& weights);
Var row_sum(Var a);
// Mean of each consecutive block of `group` rows of a column vector.
Var group_mean(Var a, int group);

// ---- distributions ----
Var log_softmax_rows(Var logits);
// out(r) = a(r, index[r]).
Var pick(Var a, const std::vector<int>& index);
// Per-row entropy of the categorical distribution given by log-probabilities.
Var entropy_rows(Var log_probs);

// ---- fused recurrent / attention blocks ----

// GRU update from precomputed gate projections.
// gx = x Wx + bx and gh = h Wh + bh, both R x 3H ordered [reset, update, new].
// r = sigmoid(gx_r + gh_r), z = sigmoid(gx_z + gh_z),
// n = tanh(gx_n + r .* gh_n), h' = (1 - z) .* n + z .* h.
Var gru_cell(Var gx, Var gh, Var h);

// Result of grouped attention: aggregated values plus the weight matrix.
struct AttentionResult {
  Var aggregated;
  // R x G: row i of a group holds w_ij for the group's members, diagonal 1.
  Matrix weights;
};

// Scaled dot-product attention inside consecutive groups of `group` rows.
//
// For observer i and member j != i of the same group the weight is the
// softmax over j != i of <query_i, key_j> / sqrt(d). The aggregate is
// sum_{j != i} w_ij value_j; the observer's own value never enters. Entries
// with `blocked(i, j) != 0` (R x group, optional) are excluded from the
// softmax and get weight exactly 0.
AttentionResult grouped_attention(Var query, Var key, Var value, int group,
                                  const Matrix* blocked = nullptr);

// ---- PPO / regression terms ----

// Elementwise min(r A, clip(r, 1-eps, 1+eps) A) with r = exp(logp - logp_old).
// The gradient follows the unclipped branch whenever it attains the min.
Var clipped_surrogate(Var log_probs, const Matrix& old_log_probs, const Matrix& advantages,
                      double clip);

// Elementwise Huber loss of (prediction - target) with threshold delta.
Var huber(Var prediction, const Matrix& target, double delta);

}  // namespace prd::ad
