#include "mcsforge/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcsforge {

AdamState AdamState::create(double lr, const Tensors& like) {
  if (lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  AdamState s;
  s.lr = lr;
  s.m = zero_grads_like(like);
  s.v = zero_grads_like(like);
  return s;
}

void AdamState::apply(Tensors& params, const Tensors& grads) {
  if (params.size() != grads.size() || params.size() != m.size())
    throw std::invalid_argument("optimizer/parameter shape mismatch");
  ++step;
  const double bc1 = 1.0 - std::pow(beta1, step);
  const double bc2 = 1.0 - std::pow(beta2, step);
  for (size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t];
    const auto& g = grads[t];
    auto& mt = m[t];
    auto& vt = v[t];
    if (p.size() != g.size())
      throw std::invalid_argument("gradient tensor shape mismatch");
    for (size_t k = 0; k < p.size(); ++k) {
      if (!std::isfinite(g[k]))
        throw std::runtime_error("non-finite gradient at tensor " + std::to_string(t) +
                                 " index " + std::to_string(k));
      mt[k] = beta1 * mt[k] + (1.0 - beta1) * g[k];
      vt[k] = beta2 * vt[k] + (1.0 - beta2) * g[k] * g[k];
      const double mhat = mt[k] / bc1;
      const double vhat = vt[k] / bc2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace mcsforge
