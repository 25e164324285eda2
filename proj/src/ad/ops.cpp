#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "prd/ad/tape.hpp"
#include "prd/common/errors.hpp"

namespace prd::ad {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw ContractError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                        std::to_string(b.rows()) + " differ");
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  const int ia = a.id(), ib = b.id();
  return a.tape().push(std::move(out), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad(ib).noalias() += t.value(ia).transpose() * g;
  });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape().push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) += g;
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape().push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ib)) t.grad(ib) -= g;
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return a.tape().push(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g.cwiseProduct(t.value(ib));
    if (t.needs_grad(ib)) t.grad(ib) += g.cwiseProduct(t.value(ia));
  });
}

Var scale(Var a, double factor) {
  const int ia = a.id();
  return a.tape().push(a.value() * factor, {a}, [ia, factor](Tape& t, int self) {
    t.grad(ia) += t.grad(self) * factor;
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ContractError("add_row: bad row shape");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  const int ia = a.id(), ir = row.id();
  return a.tape().push(std::move(out), {a, row}, [ia, ir](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g;
    if (t.needs_grad(ir)) t.grad(ir) += g.colwise().sum();
  });
}

Var tanh(Var a) {
  const int ia = a.id();
  return a.tape().push(a.value().array().tanh().matrix(), {a}, [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.grad(ia).array() += t.grad(self).array() * (1.0 - y.square());
  });
}

Var sigmoid(Var a) {
  const int ia = a.id();
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape().push(std::move(out), {a}, [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.grad(ia).array() += t.grad(self).array() * y * (1.0 - y);
  });
}

Var exp(Var a) {
  const int ia = a.id();
  return a.tape().push(a.value().array().exp().matrix(), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self).array() * t.value(self).array();
  });
}

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) throw ContractError("concat_cols: row mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols(), cb = b.cols();
  return a.tape().push(std::move(out), {a, b}, [ia, ib, ca, cb](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (t.needs_grad(ia)) t.grad(ia) += g.leftCols(ca);
    if (t.needs_grad(ib)) t.grad(ib) += g.rightCols(cb);
  });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const int ia = a.id();
  return a.tape().push(std::move(out), {a}, [ia](Tape& t, int self) {
    t.grad(ia).array() += t.grad(self)(0, 0);
  });
}

Var weighted_sum(Var a, const Matrix& weights) {
  if (weights.rows() != a.rows() || weights.cols() != a.cols()) {
    throw ContractError("weighted_sum: weight shape mismatch");
  }
  Matrix out(1, 1);
  out(0, 0) = a.value().cwiseProduct(weights).sum();
  const int ia = a.id();
  return a.tape().push(std::move(out), {a}, [ia, weights](Tape& t, int self) {
    t.grad(ia) += t.grad(self)(0, 0) * weights;
  });
}

Var row_sum(Var a) {
  const int ia = a.id();
  const Eigen::Index cols = a.cols();
  return a.tape().push(a.value().rowwise().sum(), {a}, [ia, cols](Tape& t, int self) {
    t.grad(ia) += t.grad(self).replicate(1, cols);
  });
}

Var group_mean(Var a, int group) {
  if (a.cols() != 1 || group < 1 || a.rows() % group != 0) {
    throw ContractError("group_mean: expects a column vector divisible by the group size");
  }
  const Eigen::Index groups = a.rows() / group;
  Matrix out(groups, 1);
  for (Eigen::Index g = 0; g < groups; ++g) out(g, 0) = a.value().middleRows(g * group, group).mean();
  const int ia = a.id();
  return a.tape().push(std::move(out), {a}, [ia, group, groups](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (Eigen::Index b = 0; b < groups; ++b) ga.middleRows(b * group, group).array() += g(b, 0) / group;
  });
}

Var log_softmax_rows(Var logits) {
  const Matrix& x = logits.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    const double lse = m + std::log((x.row(r).array() - m).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  const int ia = logits.id();
  return logits.tape().push(std::move(out), {logits}, [ia](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix p = t.value(self).array().exp().matrix();
    const Eigen::VectorXd gsum = g.rowwise().sum();
    t.grad(ia) += g - (p.array().colwise() * gsum.array()).matrix();
  });
}

Var pick(Var a, const std::vector<int>& index) {
  if (static_cast<Eigen::Index>(index.size()) != a.rows()) {
    throw ContractError("pick: one index per row required");
  }
  Matrix out(a.rows(), 1);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const int c = index[static_cast<std::size_t>(r)];
    if (c < 0 || c >= a.cols()) throw ContractError("pick: index out of range");
    out(r, 0) = a.value()(r, c);
  }
  const int ia = a.id();
  return a.tape().push(std::move(out), {a}, [ia, index](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& ga = t.grad(ia);
    for (Eigen::Index r = 0; r < g.rows(); ++r) ga(r, index[static_cast<std::size_t>(r)]) += g(r, 0);
  });
}

Var entropy_rows(Var log_probs) {
  const Matrix& l = log_probs.value();
  const Matrix p = l.array().exp().matrix();
  Matrix out = -(p.cwiseProduct(l)).rowwise().sum();
  const int ia = log_probs.id();
  return log_probs.tape().push(std::move(out), {log_probs}, [ia](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const auto lv = t.value(ia).array();
    const auto pv = lv.exp();
    t.grad(ia).array() -= (pv * (lv + 1.0)).colwise() * g.col(0).array();
  });
}

Var gru_cell(Var gx, Var gh, Var h) {
  const Eigen::Index hidden = h.cols();
  if (gx.cols() != 3 * hidden || gh.cols() != 3 * hidden || gx.rows() != h.rows() ||
      gh.rows() != h.rows()) {
    throw ContractError("gru_cell: gate projections must be R x 3H");
  }
  const Matrix& x = gx.value();
  const Matrix& hh = gh.value();
  Matrix r = (1.0 / (1.0 + (-(x.leftCols(hidden) + hh.leftCols(hidden)).array()).exp())).matrix();
  Matrix z = (1.0 / (1.0 + (-(x.middleCols(hidden, hidden) + hh.middleCols(hidden, hidden)).array()).exp()))
                 .matrix();
  Matrix n = (x.rightCols(hidden).array() + r.array() * hh.rightCols(hidden).array()).tanh().matrix();
  Matrix out = ((1.0 - z.array()) * n.array() + z.array() * h.value().array()).matrix();
  const int ix = gx.id(), ih_proj = gh.id(), ih = h.id();
  return h.tape().push(
      std::move(out), {gx, gh, h},
      [ix, ih_proj, ih, hidden, r = std::move(r), z = std::move(z), n = std::move(n)](Tape& t,
                                                                                              int self) {
        const auto g = t.grad(self).array();
        const auto hprev = t.value(ih).array();
        const auto ghn = t.value(ih_proj).rightCols(hidden).array();
        const Eigen::ArrayXXd dn = g * (1.0 - z.array());
        const Eigen::ArrayXXd dz = g * (hprev - n.array());
        const Eigen::ArrayXXd dpre_n = dn * (1.0 - n.array().square());
        const Eigen::ArrayXXd dr = dpre_n * ghn;
        const Eigen::ArrayXXd dpre_z = dz * z.array() * (1.0 - z.array());
        const Eigen::ArrayXXd dpre_r = dr * r.array() * (1.0 - r.array());
        if (t.needs_grad(ix)) {
          Matrix& gx_grad = t.grad(ix);
          gx_grad.leftCols(hidden).array() += dpre_r;
          gx_grad.middleCols(hidden, hidden).array() += dpre_z;
          gx_grad.rightCols(hidden).array() += dpre_n;
        }
        if (t.needs_grad(ih_proj)) {
          Matrix& gh_grad = t.grad(ih_proj);
          gh_grad.leftCols(hidden).array() += dpre_r;
          gh_grad.middleCols(hidden, hidden).array() += dpre_z;
          gh_grad.rightCols(hidden).array() += dpre_n * r.array();
        }
        if (t.needs_grad(ih)) t.grad(ih).array() += g * z.array();
      });
}

AttentionResult grouped_attention(Var query, Var key, Var value, int group, const Matrix* blocked) {
  const Eigen::Index rows = query.rows();
  if (group < 1 || rows % group != 0 || key.rows() != rows || value.rows() != rows ||
      key.cols() != query.cols()) {
    throw ContractError("grouped_attention: inconsistent shapes");
  }
  if (blocked != nullptr && (blocked->rows() != rows || blocked->cols() != group)) {
    throw ContractError("grouped_attention: blocked mask must be R x group");
  }
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(query.cols()));
  const Eigen::Index groups = rows / group;
  const Matrix& q = query.value();
  const Matrix& k = key.value();
  const Matrix& v = value.value();

  // probs holds the off-diagonal softmax weights (diagonal 0).
  Matrix probs = Matrix::Zero(rows, group);
  Matrix scores(group, group);
  for (Eigen::Index b = 0; b < groups; ++b) {
    const Eigen::Index base = b * group;
    scores.noalias() = q.middleRows(base, group).lazyProduct(k.middleRows(base, group).transpose());
    for (Eigen::Index i = 0; i < group; ++i) {
      double max_score = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < group; ++j) {
        if (j == i || (blocked != nullptr && (*blocked)(base + i, j) != 0.0)) continue;
        max_score = std::max(max_score, scores(i, j) * inv_scale);
      }
      if (max_score == -std::numeric_limits<double>::infinity()) continue;
      double total = 0.0;
      for (Eigen::Index j = 0; j < group; ++j) {
        if (j == i || (blocked != nullptr && (*blocked)(base + i, j) != 0.0)) continue;
        const double e = std::exp(scores(i, j) * inv_scale - max_score);
        probs(base + i, j) = e;
        total += e;
      }
      probs.row(base + i) /= total;
    }
  }
  Matrix aggregated(rows, v.cols());
  for (Eigen::Index b = 0; b < groups; ++b) {
    const Eigen::Index base = b * group;
    aggregated.middleRows(base, group).noalias() =
        probs.middleRows(base, group).lazyProduct(v.middleRows(base, group));
  }

  AttentionResult result;
  result.weights = probs;
  for (Eigen::Index r = 0; r < rows; ++r) result.weights(r, r % group) = 1.0;

  const int iq = query.id(), ik = key.id(), iv = value.id();
  result.aggregated = query.tape().push(
      std::move(aggregated), {query, key, value},
      [iq, ik, iv, group, groups, inv_scale, probs = std::move(probs)](Tape& t, int self) {
        const Matrix& g = t.grad(self);
        const Matrix& qv = t.value(iq);
        const Matrix& kv = t.value(ik);
        const Matrix& vv = t.value(iv);
        const bool need_q = t.needs_grad(iq), need_k = t.needs_grad(ik), need_v = t.needs_grad(iv);
        Matrix dp(group, group);
        Matrix ds(group, group);
        for (Eigen::Index b = 0; b < groups; ++b) {
          const Eigen::Index base = b * group;
          const auto p = probs.middleRows(base, group);
          const auto gb = g.middleRows(base, group);
          if (need_v) t.grad(iv).middleRows(base, group).noalias() += p.transpose().lazyProduct(gb);
          if (!need_q && !need_k) continue;
          dp.noalias() = gb.lazyProduct(vv.middleRows(base, group).transpose());
          for (Eigen::Index i = 0; i < group; ++i) {
            const double inner = p.row(i).dot(dp.row(i));
            ds.row(i) = p.row(i).array() * (dp.row(i).array() - inner);
          }
          ds *= inv_scale;
          if (need_q) t.grad(iq).middleRows(base, group).noalias() += ds.lazyProduct(kv.middleRows(base, group));
          if (need_k) {
            t.grad(ik).middleRows(base, group).noalias() += ds.transpose().lazyProduct(qv.middleRows(base, group));
          }
        }
      });
  return result;
}

Var clipped_surrogate(Var log_probs, const Matrix& old_log_probs, const Matrix& advantages,
                      double clip) {
  if (old_log_probs.rows() != log_probs.rows() || old_log_probs.cols() != log_probs.cols() ||
      advantages.rows() != log_probs.rows() || advantages.cols() != log_probs.cols()) {
    throw ContractError("clipped_surrogate: shape mismatch");
  }
  const Matrix ratio = (log_probs.value() - old_log_probs).array().exp().matrix();
  Matrix out(ratio.rows(), ratio.cols());
  // 1 where the unclipped branch attains the min.
  Matrix active(ratio.rows(), ratio.cols());
  for (Eigen::Index r = 0; r < ratio.rows(); ++r) {
    for (Eigen::Index c = 0; c < ratio.cols(); ++c) {
      const double unclipped = ratio(r, c) * advantages(r, c);
      const double clipped = std::clamp(ratio(r, c), 1.0 - clip, 1.0 + clip) * advantages(r, c);
      const bool use_unclipped = unclipped <= clipped;
      out(r, c) = use_unclipped ? unclipped : clipped;
      active(r, c) = use_unclipped ? ratio(r, c) * advantages(r, c) : 0.0;
    }
  }
  const int ia = log_probs.id();
  return log_probs.tape().push(std::move(out), {log_probs}, [ia, active](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(active);
  });
}

Var huber(Var prediction, const Matrix& target, double delta) {
  if (target.rows() != prediction.rows() || target.cols() != prediction.cols()) {
    throw ContractError("huber: shape mismatch");
  }
  const Matrix err = prediction.value() - target;
  Matrix out(err.rows(), err.cols());
  Matrix slope(err.rows(), err.cols());
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double e = err(i);
    if (std::abs(e) <= delta) {
      out(i) = 0.5 * e * e;
      slope(i) = e;
    } else {
      out(i) = delta * (std::abs(e) - 0.5 * delta);
      slope(i) = e > 0.0 ? delta : -delta;
    }
  }
  const int ia = prediction.id();
  return prediction.tape().push(std::move(out), {prediction}, [ia, slope](Tape& t, int self) {
    t.grad(ia) += t.grad(self).cwiseProduct(slope);
  });
}

}  // namespace prd::ad
