#include "mcsforge/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace mcsforge {

Mlp Mlp::create(std::vector<int> dims, Head head, Rng& rng, Activation act) {
  if (dims.size() < 2) throw std::invalid_argument("network needs at least one layer");
  Mlp net;
  net.layer_dims = std::move(dims);
  net.activation = act;
  net.head = head;
  for (int l = 0; l + 1 < static_cast<int>(net.layer_dims.size()); ++l) {
    const int in = net.layer_dims[l];
    const int out = net.layer_dims[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    std::vector<double> w(static_cast<size_t>(out) * in);
    for (double& x : w) x = (2.0 * rng.uniform() - 1.0) * bound;
    net.params.push_back(std::move(w));
    net.params.emplace_back(out, 0.0);
  }
  return net;
}

namespace {

void affine(const std::vector<double>& w, const std::vector<double>& b,
            std::span<const double> in, std::vector<double>& out) {
  const int rows = static_cast<int>(b.size());
  const int cols = static_cast<int>(in.size());
  out.assign(rows, 0.0);
  for (int r = 0; r < rows; ++r) {
    double acc = b[r];
    const double* wr = w.data() + static_cast<size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) acc += wr[c] * in[c];
    out[r] = acc;
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - mx);
    z += p[k];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> input,
                                MlpTape* tape) {
  if (static_cast<int>(input.size()) != net.input_dim())
    throw std::invalid_argument("input size does not match network input dim");
  if (tape) {
    tape->inputs.clear();
    tape->inputs.reserve(net.num_layers());
  }
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (int l = 0; l < net.num_layers(); ++l) {
    if (tape) tape->inputs.push_back(cur);
    affine(net.weight(l), net.bias(l), cur, next);
    if (l + 1 < net.num_layers()) {
      if (net.activation == Activation::Tanh)
        for (double& v : next) v = std::tanh(v);
      else
        for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    cur.swap(next);
  }
  if (tape) tape->pre_head = cur;
  std::vector<double> out =
      net.head == Head::SoftmaxLogits ? softmax(cur) : cur;
  if (tape) tape->output = out;
  return out;
}

Tensors zero_grads_like(const Tensors& params) {
  Tensors g;
  g.reserve(params.size());
  for (const auto& t : params) g.emplace_back(t.size(), 0.0);
  return g;
}

std::vector<double> mlp_backward(const Mlp& net, const MlpTape& tape,
                                 std::span<const double> upstream, Tensors& grads) {
  if (static_cast<int>(upstream.size()) != net.output_dim())
    throw std::invalid_argument("upstream gradient size mismatch");
  if (grads.size() != net.params.size())
    throw std::invalid_argument("gradient accumulator shape mismatch");

  // head jacobian
  std::vector<double> delta(upstream.begin(), upstream.end());
  if (net.head == Head::SoftmaxLogits) {
    const auto& p = tape.output;
    double dot = 0.0;
    for (size_t k = 0; k < p.size(); ++k) dot += upstream[k] * p[k];
    for (size_t k = 0; k < p.size(); ++k) delta[k] = p[k] * (upstream[k] - dot);
  }

  for (int l = net.num_layers() - 1; l >= 0; --l) {
    const auto& in = tape.inputs[l];
    const int rows = net.layer_dims[l + 1];
    const int cols = net.layer_dims[l];
    auto& gw = grads[2 * l];
    auto& gb = grads[2 * l + 1];
    for (int r = 0; r < rows; ++r) {
      gb[r] += delta[r];
      double* gwr = gw.data() + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) gwr[c] += delta[r] * in[c];
    }
    if (l == 0) {
      std::vector<double> din(cols, 0.0);
      const auto& w = net.weight(l);
      for (int r = 0; r < rows; ++r) {
        const double* wr = w.data() + static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) din[c] += wr[c] * delta[r];
      }
      return din;
    }
    // propagate through layer l's input, which is layer l-1's activated output
    std::vector<double> prev(cols, 0.0);
    const auto& w = net.weight(l);
    for (int r = 0; r < rows; ++r) {
      const double* wr = w.data() + static_cast<size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) prev[c] += wr[c] * delta[r];
    }
    // activation derivative at layer l-1's output (== this layer's input)
    if (net.activation == Activation::Tanh) {
      for (int c = 0; c < cols; ++c) prev[c] *= 1.0 - in[c] * in[c];
    } else {
      for (int c = 0; c < cols; ++c)
        if (in[c] <= 0.0) prev[c] = 0.0;
    }
    delta.swap(prev);
  }
  return {};
}

double log_prob(std::span<const double> probs, int action) {
  return std::log(std::max(probs[action], 1e-300));
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

}  // namespace mcsforge
