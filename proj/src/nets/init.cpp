#include "prd/nets/init.hpp"

#include <cmath>
#include <numbers>

namespace prd::nets {

double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::MatrixXd orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
  const bool transpose = rows < cols;
  const Eigen::Index tall = transpose ? cols : rows;
  const Eigen::Index wide = transpose ? rows : cols;
  Eigen::MatrixXd a(tall, wide);
  for (Eigen::Index j = 0; j < wide; ++j) {
    for (Eigen::Index i = 0; i < tall; ++i) a(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
  // Sign fix makes the draw uniform over the orthogonal group.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(wide).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < wide; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  q *= gain;
  if (transpose) return q.transpose();
  return q;
}

}  // namespace prd::nets
