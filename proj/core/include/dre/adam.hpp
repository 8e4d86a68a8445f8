#pragma once

#include <cmath>

#include "dre/common.hpp"

namespace dre {

/// Adam with bias correction. Defaults match the usual torch settings.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;      // completed steps
  Vector m, v;     // first/second moment estimates, sized on first step

  /// params <- params - lr * mhat / (sqrt(vhat) + eps)
  void step(Vector& params, const Vector& grad) {
    if (t == 0) {
      m = Vector::Zero(params.size());
      v = Vector::Zero(params.size());
    }
    if (grad.size() != params.size() || m.size() != params.size())
      throw std::invalid_argument("AdamState::step: size mismatch");
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad).eval();
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
  }
};

inline void adam_step(Vector& params, const Vector& grad, AdamState& state) {
  state.step(params, grad);
}

}  // namespace dre
