#pragma once

#include "mcsforge/mlp.hpp"

namespace mcsforge {

// Adaptive-moment first-order optimizer over a tensor list.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int step = 0;
  Tensors m, v;

  static AdamState create(double lr, const Tensors& like);

  // one update; rejects non-finite gradients with std::runtime_error
  void apply(Tensors& params, const Tensors& grads);
};

}  // namespace mcsforge
