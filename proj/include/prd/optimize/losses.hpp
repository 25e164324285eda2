#pragma once

namespace prd::optimize {

// min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_term(double ratio, double advantage, double clip);

// 0.5 e^2 for |e| <= delta, delta (|e| - delta / 2) beyond.
double huber_value(double error, double delta);

}  // namespace prd::optimize
