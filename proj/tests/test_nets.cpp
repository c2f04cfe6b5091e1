#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mcsforge/checkpoint.hpp"
#include "mcsforge/lstm.hpp"
#include "mcsforge/mlp.hpp"
#include "mcsforge/optim.hpp"
#include "test_helpers.hpp"

using namespace mcsforge;
using testutil::max_grad_err;
using testutil::rel_err;

namespace {

std::vector<double> random_vec(int n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("softmax head is a distribution; scalar head passes through") {
  Rng rng(1);
  Mlp pol = Mlp::create({4, 8, 3}, Head::SoftmaxLogits, rng);
  const auto probs = mlp_forward(pol, random_vec(4, rng));
  double sum = 0.0;
  for (double p : probs) {
    CHECK(p > 0.0);
    sum += p;
  }
  CHECK(sum == doctest::Approx(1.0));

  Mlp val = Mlp::create({4, 8, 1}, Head::Scalar, rng);
  MlpTape tape;
  const auto out = mlp_forward(val, random_vec(4, rng), &tape);
  CHECK(out == tape.pre_head);
}

TEST_CASE("mlp gradients match finite differences for both heads") {
  Rng rng(2);
  for (Head head : {Head::SoftmaxLogits, Head::Scalar}) {
    Mlp net = Mlp::create({6, 16, 16, head == Head::Scalar ? 1 : 4}, head, rng);
    const auto input = random_vec(6, rng);
    const auto u = random_vec(net.output_dim(), rng);  // fixed linear readout

    MlpTape tape;
    mlp_forward(net, input, &tape);
    Tensors grads = zero_grads_like(net.params);
    mlp_backward(net, tape, u, grads);

    auto loss = [&] {
      const auto out = mlp_forward(net, input);
      return std::inner_product(out.begin(), out.end(), u.begin(), 0.0);
    };
    CHECK(max_grad_err(net.params, grads, loss, 150, rng) < 1e-4);
  }
}

TEST_CASE("mlp_backward input gradient matches finite differences") {
  Rng rng(3);
  Mlp net = Mlp::create({5, 12, 3}, Head::SoftmaxLogits, rng);
  auto input = random_vec(5, rng);
  const auto u = random_vec(3, rng);

  MlpTape tape;
  mlp_forward(net, input, &tape);
  Tensors grads = zero_grads_like(net.params);
  const auto dinput = mlp_backward(net, tape, u, grads);

  auto loss = [&] {
    const auto out = mlp_forward(net, input);
    return std::inner_product(out.begin(), out.end(), u.begin(), 0.0);
  };
  for (size_t k = 0; k < input.size(); ++k) {
    const double fd = testutil::central_diff(input[k], loss);
    CHECK(rel_err(dinput[k], fd) < 1e-5);
  }
}

TEST_CASE("lstm backward matches finite differences through a sequence") {
  Rng rng(4);
  LstmCell cell = LstmCell::create(5, 6, rng);
  const int T = 7;
  std::vector<std::vector<double>> xs, us;
  for (int t = 0; t < T; ++t) {
    xs.push_back(random_vec(5, rng));
    us.push_back(random_vec(6, rng));
  }

  auto run = [&](std::vector<LstmStepTape>* tapes) {
    LstmState st = lstm_zero_state(cell);
    double L = 0.0;
    for (int t = 0; t < T; ++t) {
      LstmStepTape tape;
      const auto h = lstm_step(cell, xs[t], st, tapes ? &tape : nullptr);
      if (tapes) tapes->push_back(std::move(tape));
      L += std::inner_product(h.begin(), h.end(), us[t].begin(), 0.0);
    }
    return L;
  };

  std::vector<LstmStepTape> tapes;
  run(&tapes);
  Tensors grads = zero_grads_like(cell.params);
  std::vector<std::vector<double>> dxs;
  lstm_backward(cell, tapes, us, grads, &dxs);

  auto loss = [&] { return run(nullptr); };
  CHECK(max_grad_err(cell.params, grads, loss, 150, rng) < 1e-3);

  // input gradients too
  REQUIRE(dxs.size() == size_t(T));
  for (int t = 0; t < T; t += 2)
    for (size_t k = 0; k < xs[t].size(); ++k) {
      const double fd = testutil::central_diff(xs[t][k], loss);
      CHECK(rel_err(dxs[t][k], fd) < 1e-4);
    }
}

TEST_CASE("adam reproduces the textbook first step") {
  Tensors params = {{1.0, -2.0}};
  const Tensors grads = {{0.5, -1.5}};
  AdamState opt = AdamState::create(0.01, params);
  opt.apply(params, grads);
  // first step: m_hat = g, v_hat = g^2 -> update = -lr * g / (|g| + eps)
  for (int k = 0; k < 2; ++k) {
    const double g = grads[0][k];
    const double expect = (k == 0 ? 1.0 : -2.0) - 0.01 * g / (std::fabs(g) + 1e-8);
    CHECK(params[0][k] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("adam rejects non-finite gradients and keeps shapes") {
  Tensors params = {{1.0, 2.0}};
  AdamState opt = AdamState::create(0.01, params);
  const Tensors bad = {{std::nan(""), 0.0}};
  CHECK_THROWS_AS(opt.apply(params, bad), std::runtime_error);
}

TEST_CASE("zero gradients leave parameters bitwise untouched") {
  Rng rng(5);
  Tensors params = {random_vec(16, rng)};
  const Tensors before = params;
  Tensors zeros = zero_grads_like(params);
  AdamState opt = AdamState::create(0.01, params);
  opt.apply(params, zeros);
  opt.apply(params, zeros);
  CHECK(params == before);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  testutil::TempDir tmp("ckpt");
  Checkpoint cp;
  cp.meta["kind"] = "test";
  cp.meta["note"] = "label with spaces\nand a newline";
  std::vector<double> weird = {0.0, -0.0, 1e-310, -1e308, 0.1, 1.0 / 3.0,
                               std::numeric_limits<double>::min()};
  cp.add("weird", {int64_t(weird.size())}, weird);
  Rng rng(6);
  cp.add("mat", {4, 3}, random_vec(12, rng));

  const std::string path = (tmp.path / "a.ckpt").string();
  cp.save(path);
  const Checkpoint back = Checkpoint::load(path);
  CHECK(back.meta == cp.meta);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.find("weird").shape == cp.find("weird").shape);
  const auto& w = back.find("weird").data;
  REQUIRE(w.size() == weird.size());
  for (size_t k = 0; k < weird.size(); ++k) {
    // bit-level comparison (covers -0.0 and denormals)
    CHECK(std::memcmp(&w[k], &weird[k], sizeof(double)) == 0);
  }
  CHECK(back.has("mat"));
  CHECK_FALSE(back.has("missing"));
  CHECK_THROWS_AS(back.find("missing"), IoError);
}

TEST_CASE("checkpoint io failures raise IoError") {
  CHECK_THROWS_AS(Checkpoint::load("/nonexistent/dir/x.ckpt"), IoError);
  testutil::TempDir tmp("ckpt_bad");
  const std::string path = (tmp.path / "garbage.ckpt").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "this is not a checkpoint";
  }
  CHECK_THROWS_AS(Checkpoint::load(path), IoError);
  Checkpoint cp;
  CHECK_THROWS_AS(cp.save("/nonexistent/dir/x.ckpt"), IoError);
}
