#include "mcsforge/lstm.hpp"

#include <cmath>
#include <stdexcept>

namespace mcsforge {

namespace {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

LstmCell LstmCell::create(int input_dim, int hidden_dim, Rng& rng) {
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden_dim = hidden_dim;
  const int rows = 4 * hidden_dim;
  auto init = [&](int cols) {
    const double bound = std::sqrt(6.0 / (cols + hidden_dim));
    std::vector<double> w(static_cast<size_t>(rows) * cols);
    for (double& x : w) x = (2.0 * rng.uniform() - 1.0) * bound;
    return w;
  };
  cell.params.push_back(init(input_dim));
  cell.params.push_back(init(hidden_dim));
  std::vector<double> b(rows, 0.0);
  for (int k = hidden_dim; k < 2 * hidden_dim; ++k) b[k] = 1.0;  // forget gate
  cell.params.push_back(std::move(b));
  return cell;
}

LstmState lstm_zero_state(const LstmCell& cell) {
  return {std::vector<double>(cell.hidden_dim, 0.0),
          std::vector<double>(cell.hidden_dim, 0.0)};
}

std::vector<double> lstm_step(const LstmCell& cell, std::span<const double> input,
                              LstmState& state, LstmStepTape* tape) {
  const int H = cell.hidden_dim;
  if (static_cast<int>(input.size()) != cell.input_dim)
    throw std::invalid_argument("lstm input size mismatch");
  const auto& wx = cell.params[0];
  const auto& wh = cell.params[1];
  const auto& b = cell.params[2];

  std::vector<double> pre(4 * H);
  for (int r = 0; r < 4 * H; ++r) {
    double acc = b[r];
    const double* wxr = wx.data() + static_cast<size_t>(r) * cell.input_dim;
    for (int c = 0; c < cell.input_dim; ++c) acc += wxr[c] * input[c];
    const double* whr = wh.data() + static_cast<size_t>(r) * H;
    for (int c = 0; c < H; ++c) acc += whr[c] * state.h[c];
    pre[r] = acc;
  }

  std::vector<double> gi(H), gf(H), gg(H), go(H), c_new(H), tc(H);
  for (int k = 0; k < H; ++k) {
    gi[k] = sigmoid(pre[k]);
    gf[k] = sigmoid(pre[H + k]);
    gg[k] = std::tanh(pre[2 * H + k]);
    go[k] = sigmoid(pre[3 * H + k]);
    c_new[k] = gf[k] * state.c[k] + gi[k] * gg[k];
    tc[k] = std::tanh(c_new[k]);
  }
  std::vector<double> h_new(H);
  for (int k = 0; k < H; ++k) h_new[k] = go[k] * tc[k];

  if (tape) {
    tape->x.assign(input.begin(), input.end());
    tape->h_prev = state.h;
    tape->c_prev = state.c;
    tape->i = gi;
    tape->f = gf;
    tape->g = gg;
    tape->o = go;
    tape->c_new = c_new;
    tape->tanh_c = tc;
  }
  state.h = h_new;
  state.c = c_new;
  return h_new;
}

void lstm_backward(const LstmCell& cell, const std::vector<LstmStepTape>& steps,
                   const std::vector<std::vector<double>>& dh_out, Tensors& grads,
                   std::vector<std::vector<double>>* dx_out) {
  if (steps.size() != dh_out.size())
    throw std::invalid_argument("tape/upstream length mismatch");
  const int H = cell.hidden_dim;
  const int In = cell.input_dim;
  auto& gwx = grads[0];
  auto& gwh = grads[1];
  auto& gb = grads[2];
  const auto& wx = cell.params[0];
  const auto& wh = cell.params[1];
  if (dx_out) dx_out->assign(steps.size(), std::vector<double>(In, 0.0));

  std::vector<double> dh(H, 0.0), dc(H, 0.0), dpre(4 * H);
  for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
    const auto& tp = steps[t];
    for (int k = 0; k < H; ++k) dh[k] += dh_out[t][k];
    for (int k = 0; k < H; ++k) {
      const double d_tc = dh[k] * tp.o[k];
      const double dck = dc[k] + d_tc * (1.0 - tp.tanh_c[k] * tp.tanh_c[k]);
      const double d_o = dh[k] * tp.tanh_c[k];
      const double d_i = dck * tp.g[k];
      const double d_f = dck * tp.c_prev[k];
      const double d_g = dck * tp.i[k];
      dpre[k] = d_i * tp.i[k] * (1.0 - tp.i[k]);
      dpre[H + k] = d_f * tp.f[k] * (1.0 - tp.f[k]);
      dpre[2 * H + k] = d_g * (1.0 - tp.g[k] * tp.g[k]);
      dpre[3 * H + k] = d_o * tp.o[k] * (1.0 - tp.o[k]);
      dc[k] = dck * tp.f[k];  // carried to t-1
    }
    for (int r = 0; r < 4 * H; ++r) {
      gb[r] += dpre[r];
      double* gxr = gwx.data() + static_cast<size_t>(r) * In;
      for (int c = 0; c < In; ++c) gxr[c] += dpre[r] * tp.x[c];
      double* ghr = gwh.data() + static_cast<size_t>(r) * H;
      for (int c = 0; c < H; ++c) ghr[c] += dpre[r] * tp.h_prev[c];
    }
    if (dx_out) {
      auto& dx = (*dx_out)[t];
      for (int r = 0; r < 4 * H; ++r) {
        const double* wxr = wx.data() + static_cast<size_t>(r) * In;
        for (int c = 0; c < In; ++c) dx[c] += wxr[c] * dpre[r];
      }
    }
    // dL/dh_{t-1}
    std::vector<double> dh_prev(H, 0.0);
    for (int r = 0; r < 4 * H; ++r) {
      const double* whr = wh.data() + static_cast<size_t>(r) * H;
      for (int c = 0; c < H; ++c) dh_prev[c] += whr[c] * dpre[r];
    }
    dh.swap(dh_prev);
  }
}

}  // namespace mcsforge
