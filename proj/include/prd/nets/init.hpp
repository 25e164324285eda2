#pragma once

#include <Eigen/Dense>

#include "prd/common/random.hpp"

namespace prd::nets {

// Standard normal draw (Box-Muller over uniform01, identical on every platform).
double standard_normal(Rng& rng);

// Random matrix with orthonormal rows or columns (whichever is smaller), times `gain`.
Eigen::MatrixXd orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng);

}  // namespace prd::nets
