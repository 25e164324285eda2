#include "prd/optimize/losses.hpp"

#include <algorithm>
#include <cmath>

#include "prd/common/errors.hpp"

namespace prd::optimize {

double clipped_term(double ratio, double advantage, double clip) {
  if (!(ratio > 0.0)) throw ContractError("clipped_term: ratio must be positive");
  return std::min(ratio * advantage, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantage);
}

double huber_value(double error, double delta) {
  const double a = std::abs(error);
  return a <= delta ? 0.5 * error * error : delta * (a - 0.5 * delta);
}

}  // namespace prd::optimize
