#pragma once

#include <span>
#include <vector>

#include "mcsforge/rng.hpp"

namespace mcsforge {

using Tensors = std::vector<std::vector<double>>;

enum class Activation { Tanh, Relu };
enum class Head { SoftmaxLogits, Scalar };

// Plain feed-forward network, parameters stored as alternating
// (weight, bias) tensors per layer. Weights are row-major (out x in).
// Hidden layers apply the activation; the last layer feeds the head.
struct Mlp {
  std::vector<int> layer_dims;  // [input, hidden..., output]
  Tensors params;
  Activation activation = Activation::Tanh;
  Head head = Head::SoftmaxLogits;

  static Mlp create(std::vector<int> dims, Head head, Rng& rng,
                    Activation act = Activation::Tanh);

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }

  const std::vector<double>& weight(int layer) const { return params[2 * layer]; }
  const std::vector<double>& bias(int layer) const { return params[2 * layer + 1]; }
  std::vector<double>& weight(int layer) { return params[2 * layer]; }
  std::vector<double>& bias(int layer) { return params[2 * layer + 1]; }
};

// Activation record from one forward pass, consumed by mlp_backward.
struct MlpTape {
  std::vector<std::vector<double>> inputs;  // inputs[l] = input of layer l
  std::vector<double> pre_head;             // last layer pre-head output
  std::vector<double> output;
};

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                MlpTape* tape = nullptr);

Tensors zero_grads_like(const Tensors& params);

// Accumulates dL/dparams into `grads` given dL/doutput. Returns dL/dinput.
std::vector<double> mlp_backward(const Mlp& net, const MlpTape& tape,
                                 std::span<const double> upstream, Tensors& grads);

// categorical helpers over a softmax-head output
double log_prob(std::span<const double> probs, int action);
double entropy(std::span<const double> probs);

}  // namespace mcsforge
