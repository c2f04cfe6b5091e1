#pragma once

#include <span>
#include <vector>

#include "mcsforge/mlp.hpp"

namespace mcsforge {

// Single LSTM cell. Parameters: Wx (4H x in), Wh (4H x H), b (4H),
// gate order i, f, g, o. Forget gate bias starts at 1.
struct LstmCell {
  int input_dim = 0;
  int hidden_dim = 0;
  Tensors params;

  static LstmCell create(int input_dim, int hidden_dim, Rng& rng);
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

LstmState lstm_zero_state(const LstmCell& cell);

struct LstmStepTape {
  std::vector<double> x;
  std::vector<double> h_prev, c_prev;
  std::vector<double> i, f, g, o;  // post-nonlinearity gate values
  std::vector<double> c_new, tanh_c;
};

// advances `state`, returns the new hidden vector
std::vector<double> lstm_step(const LstmCell& cell, std::span<const double> input,
                              LstmState& state, LstmStepTape* tape = nullptr);

// Backprop through a recorded sequence. dh_out[t] is dL/dh_t coming from
// whatever consumed the hidden state at step t. Gradients accumulate.
// When dx_out is given it receives dL/dx_t per step (for an upstream encoder).
void lstm_backward(const LstmCell& cell, const std::vector<LstmStepTape>& steps,
                   const std::vector<std::vector<double>>& dh_out, Tensors& grads,
                   std::vector<std::vector<double>>* dx_out = nullptr);

}  // namespace mcsforge
