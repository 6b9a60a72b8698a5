#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sleepfuse/adam.hpp"
#include "sleepfuse/tensor.hpp"

using namespace sleepfuse;
using namespace sleepfuse::num;

namespace {

Tensor random_tensor(Rng& rng, std::vector<std::size_t> shape, bool grad = true, double lo = -2.0,
                     double hi = 2.0) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> data(n);
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data), grad);
}

// sum(t ⊙ weights) built from differentiable primitives.
Tensor reduce_weighted(const Tensor& t, const Tensor& weights, Tape* tape) {
  Tensor prod = mul(t, weights, tape);
  Tensor left = Tensor::full({1, prod.rows()}, 1.0);
  Tensor right = Tensor::full({prod.cols(), 1}, 1.0);
  return matmul(matmul(left, prod, tape), right, tape);
}

// Reverse-mode vs central finite differences on every entry of every input.
void check_grads_fd(const std::function<Tensor(Tape*)>& loss_fn, std::vector<Tensor> inputs,
                    double tol, double h = 1e-5) {
  Tape tape;
  Tensor loss = loss_fn(&tape);
  tape.backward(loss);
  for (Tensor& in : inputs) {
    const std::vector<double> g = in.grad();
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double orig = in.at(i);
      in.at(i) = orig + h;
      const double lp = loss_fn(nullptr).at(0);
      in.at(i) = orig - h;
      const double lm = loss_fn(nullptr).at(0);
      in.at(i) = orig;
      const double fd = (lp - lm) / (2.0 * h);
      CAPTURE(i);
      CHECK(oracles::grad_close(g[i], fd, tol));
    }
    in.zero_grad();
  }
}

}  // namespace

TEST_CASE("matmul identity and hand products") {
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor c = matmul(eye, a);
  CHECK(c.values() == std::vector<double>{1, 2, 3, 4});

  Tensor r({1, 2}, {1, 2});
  Tensor col({2, 1}, {3, 4});
  CHECK(matmul(r, col).at(0) == doctest::Approx(11.0).epsilon(0));
}

TEST_CASE("matmul matches the triple-loop oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    Tensor a = random_tensor(rng, {3, 4}, false, -10.0, 10.0);
    Tensor b = random_tensor(rng, {4, 2}, false, -10.0, 10.0);
    Tensor c = matmul(a, b);
    auto ref = oracles::matmul(a.values(), b.values(), 3, 4, 2);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.at(i) - ref[i]) < 1e-12);
  }
}

TEST_CASE("matmul shape error names both shapes") {
  Tensor a = Tensor::zeros({3, 4});
  Tensor b = Tensor::zeros({5, 2});
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[3x4]") != std::string::npos);
    CHECK(msg.find("[5x2]") != std::string::npos);
  }
}

TEST_CASE("elementwise symmetry points and relu definition") {
  Tensor x({1, 4}, {0.0, 0.7, -3.0, 3.0});
  CHECK(tanh_op(x).at(0) == 0.0);
  CHECK(sigmoid(x).at(0) == 0.5);
  CHECK(relu(x).at(2) == 0.0);
  CHECK(relu(x).at(3) == 3.0);
}

TEST_CASE("tanh gradient at 0.7 matches central finite difference") {
  Tensor x = Tensor::scalar(0.7, true);
  Tape tape;
  Tensor y = tanh_op(x, &tape);
  tape.backward(y);
  const double fd = oracles::finite_difference([](double v) { return std::tanh(v); }, 0.7, 1e-5);
  CHECK(std::abs(x.grad()[0] - fd) < 1e-7);
}

TEST_CASE("add and mul broadcast along the leading dimension") {
  Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b({1, 3}, {10, 20, 30});
  Tensor s = add(a, b);
  CHECK(s.values() == std::vector<double>{11, 22, 33, 14, 25, 36});
  Tensor p = mul(a, b);
  CHECK(p.values() == std::vector<double>{10, 40, 90, 40, 100, 180});
  CHECK_THROWS_AS(add(a, Tensor::zeros({2, 2})), ShapeError);
}

TEST_CASE("softmax uniform, stability and extended-precision oracle") {
  Tensor z({1, 3}, {0, 0, 0});
  Tensor u = softmax_lastdim(z);
  for (std::size_t i = 0; i < 3; ++i) CHECK(u.at(i) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Tensor big({1, 3}, {1000, 0, 0});
  Tensor s = softmax_lastdim(big);
  CHECK(s.at(0) == doctest::Approx(1.0));
  CHECK(s.at(1) == 0.0);
  CHECK(std::isfinite(s.at(0)));

  Tensor x({1, 3}, {1, 2, 3});
  Tensor y = softmax_lastdim(x);
  long double e1 = expl(1.0L), e2 = expl(2.0L), e3 = expl(3.0L);
  long double denom = e1 + e2 + e3;
  CHECK(std::abs(y.at(0) - static_cast<double>(e1 / denom)) < 1e-12);
  CHECK(std::abs(y.at(1) - static_cast<double>(e2 / denom)) < 1e-12);
  CHECK(std::abs(y.at(2) - static_cast<double>(e3 / denom)) < 1e-12);
}

TEST_CASE("softmax rows sum to 1 and are shift invariant") {
  Rng rng(21);
  for (int seed = 0; seed < 20; ++seed) {
    Tensor x = random_tensor(rng, {4, 6}, false, -5.0, 5.0);
    Tensor y = softmax_lastdim(x);
    for (std::size_t r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < 6; ++j) sum += y(r, j);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    Tensor shifted = x.clone();
    const double c = rng.uniform(-3.0, 3.0);
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted.at(i) += c;
    Tensor y2 = softmax_lastdim(shifted);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(y.at(i) - y2.at(i)) < 1e-12);
  }
}

TEST_CASE("layer_norm collapses constant slices to the bias") {
  Tensor x({1, 4}, {5, 5, 5, 5});
  Tensor gain = Tensor::full({4}, 1.0);
  Tensor bias = Tensor::zeros({4});
  Tensor y = layer_norm(x, gain, bias);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(y.at(i)) < 1e-9);
}

TEST_CASE("layer_norm output has mean 0 and variance 1") {
  Rng rng(5);
  Tensor x = random_tensor(rng, {3, 8}, false, -4.0, 4.0);
  Tensor y = layer_norm(x, Tensor::full({8}, 1.0), Tensor::zeros({8}));
  for (std::size_t r = 0; r < 3; ++r) {
    double mean = 0.0, var = 0.0;
    for (std::size_t j = 0; j < 8; ++j) mean += y(r, j);
    mean /= 8.0;
    for (std::size_t j = 0; j < 8; ++j) var += (y(r, j) - mean) * (y(r, j) - mean);
    var /= 8.0;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-4);  // eps=1e-5 inside the sqrt shifts variance slightly
  }
}

TEST_CASE("layer_norm gradient matches finite differences on a 2x4 input") {
  Rng rng(11);
  Tensor x = random_tensor(rng, {2, 4});
  Tensor gain = random_tensor(rng, {4}, true, 0.5, 1.5);
  Tensor bias = random_tensor(rng, {4});
  Tensor w = random_tensor(rng, {2, 4}, false);
  auto loss = [&](Tape* t) { return reduce_weighted(layer_norm(x, gain, bias, t), w, t); };
  check_grads_fd(loss, {x, gain, bias}, 1e-5);
}

TEST_CASE("dropout identity cases and config error") {
  Rng rng(3);
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor eval_out = dropout(x, 0.4, false, rng);
  CHECK(eval_out.values() == x.values());
  Tensor zero_rate = dropout(x, 0.0, true, rng);
  CHECK(zero_rate.values() == x.values());
  CHECK_THROWS_AS(dropout(x, 1.0, true, rng), ConfigError);
  CHECK_THROWS_AS(dropout(x, -0.1, true, rng), ConfigError);
}

TEST_CASE("dropout survivor fraction and mean at rate 0.4") {
  const std::size_t n = 100000;
  Tensor x = Tensor::full({1, n}, 1.0);
  Rng rng(42);
  Tensor y = dropout(x, 0.4, true, rng);
  std::size_t survivors = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y.at(i) != 0.0) ++survivors;
    sum += y.at(i);
  }
  const double frac = static_cast<double>(survivors) / static_cast<double>(n);
  CHECK(std::abs(frac - 0.6) < 0.01);
  CHECK(std::abs(sum / static_cast<double>(n) - 1.0) < 0.02);
}

TEST_CASE("dropout is deterministic for a fixed seed") {
  Tensor x = Tensor::full({1, 2048}, 1.0);
  Rng a(77), b(77);
  Tensor ya = dropout(x, 0.4, true, a);
  Tensor yb = dropout(x, 0.4, true, b);
  CHECK(ya.values() == yb.values());
}

TEST_CASE("cross entropy of uniform logits is ln K") {
  Tensor logits = Tensor::zeros({1, 5});
  Tensor onehot({1, 5}, {0, 0, 1, 0, 0});
  Tensor loss = cross_entropy_loss(logits, onehot);
  CHECK(loss.at(0) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy decreases monotonically as the true logit grows") {
  Tensor onehot({1, 5}, {1, 0, 0, 0, 0});
  double prev = std::numeric_limits<double>::infinity();
  for (double v = 0.0; v <= 20.0; v += 2.0) {
    Tensor logits({1, 5}, {v, 0, 0, 0, 0});
    const double l = cross_entropy_loss(logits, onehot).at(0);
    CHECK(l < prev);
    prev = l;
  }
  CHECK(prev < 1e-8);  // large-logit limit drives the loss toward 0
}

TEST_CASE("cross entropy gradient matches finite differences on B=2 K=5") {
  Rng rng(13);
  Tensor logits = random_tensor(rng, {2, 5});
  Tensor onehot({2, 5}, {0, 1, 0, 0, 0, 0, 0, 0, 0, 1});
  auto loss = [&](Tape* t) { return cross_entropy_loss(logits, onehot, t); };
  check_grads_fd(loss, {logits}, 1e-6);
}

TEST_CASE("cross entropy rejects rows that are not one-hot") {
  Tensor logits = Tensor::zeros({1, 5});
  CHECK_THROWS_AS(cross_entropy_loss(logits, Tensor({1, 5}, {0.5, 0.5, 0, 0, 0})),
                  ValidationError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, Tensor({1, 5}, {1, 1, 0, 0, 0})), ValidationError);
  CHECK_THROWS_AS(cross_entropy_loss(logits, Tensor::zeros({1, 5})), ValidationError);
}

TEST_CASE("backward computes d(w^2)/dw = 2w and flags misuse") {
  Tensor w = Tensor::scalar(1.0, true);
  Tape tape;
  Tensor loss = mul(w, w, &tape);
  tape.backward(loss);
  CHECK(w.grad()[0] == doctest::Approx(2.0).epsilon(1e-14));

  CHECK_THROWS_AS(tape.backward(loss), StateError);  // double backward without reset
  tape.reset();
  CHECK_THROWS_AS(tape.backward(Tensor::zeros({2, 2})), ShapeError);  // non-scalar loss
}

TEST_CASE("composite tanh(W x) gradients match finite differences") {
  Rng rng(17);
  Tensor w = random_tensor(rng, {3, 3});
  Tensor x = random_tensor(rng, {3, 1}, false);
  Tensor ones = Tensor::full({1, 3}, 1.0);
  auto loss = [&](Tape* t) { return matmul(ones, tanh_op(matmul(w, x, t), t), t); };
  check_grads_fd(loss, {w}, 1e-5);
}

TEST_CASE("disconnected parameter keeps an exactly zero gradient") {
  Tensor x = Tensor::scalar(2.0, true);
  Tensor w = Tensor::scalar(5.0, true);
  Tape tape;
  Tensor loss = mul(x, x, &tape);
  mul(w, w, &tape);  // on the tape, but not feeding the loss
  tape.backward(loss);
  CHECK(w.grad()[0] == 0.0);
  CHECK(x.grad()[0] == doctest::Approx(4.0));
}

TEST_CASE("adam first step magnitude equals lr when eps is zero") {
  Tensor w = Tensor::scalar(0.5, true);
  Tape tape;
  Tensor loss = mul(w, w, &tape);
  tape.backward(loss);
  AdamConfig cfg;
  cfg.eps = 0.0;
  Adam adam({w}, cfg);
  adam.step();
  CHECK(std::abs(0.5 - w.at(0)) == doctest::Approx(cfg.lr).epsilon(1e-12));
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam leaves parameters unchanged under a zero gradient") {
  Tensor w = Tensor::scalar(1.25, true);
  Tensor x = Tensor::scalar(3.0, true);
  Tape tape;
  Tensor loss = mul(x, x, &tape);
  mul(w, w, &tape);  // allocates w's grad, stays zero
  tape.backward(loss);
  Adam adam({w});
  adam.step();
  CHECK(w.at(0) == 1.25);
}

TEST_CASE("adam refuses parameters that never received a gradient") {
  Tensor w = Tensor::scalar(1.0, true);
  Adam adam({w});
  CHECK_THROWS_AS(adam.step(), StateError);
}

TEST_CASE("adam descends (w-3)^2 nearly monotonically in loss") {
  Tensor w = Tensor::scalar(0.0, true);
  Tensor minus3 = Tensor::scalar(-3.0);
  Adam adam({w});  // lr 5e-3 default
  double prev_loss = std::numeric_limits<double>::infinity();
  int decreases = 0;
  const int steps = 200;
  for (int s = 0; s < steps; ++s) {
    Tape tape;
    Tensor d = add(w, minus3, &tape);
    Tensor loss = mul(d, d, &tape);
    if (loss.at(0) < prev_loss) ++decreases;
    prev_loss = loss.at(0);
    tape.backward(loss);
    adam.step();
  }
  CHECK(decreases >= static_cast<int>(0.95 * steps));
}

TEST_CASE("every differentiable op passes finite-difference checks over 20 seeds") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t m = 2 + rng.next_below(6);  // ≤ 8x8 tensors
    const std::size_t n = 2 + rng.next_below(6);
    Tensor x = random_tensor(rng, {m, n});
    Tensor y = random_tensor(rng, {m, n});
    Tensor wr = random_tensor(rng, {m, n}, false);

    auto weighted = [&](std::function<Tensor(Tape*)> op) {
      return [&, op](Tape* t) { return reduce_weighted(op(t), wr, t); };
    };

    check_grads_fd(weighted([&](Tape* t) { return tanh_op(x, t); }), {x}, 1e-4);
    check_grads_fd(weighted([&](Tape* t) { return sigmoid(x, t); }), {x}, 1e-4);
    check_grads_fd(weighted([&](Tape* t) { return add(x, y, t); }), {x, y}, 1e-4);
    check_grads_fd(weighted([&](Tape* t) { return mul(x, y, t); }), {x, y}, 1e-4);
    check_grads_fd(weighted([&](Tape* t) { return scale(x, 1.7, t); }), {x}, 1e-4);
    check_grads_fd(weighted([&](Tape* t) { return softmax_lastdim(x, t); }), {x}, 1e-4);

    // relu: keep inputs away from the kink
    Tensor xr = random_tensor(rng, {m, n});
    for (std::size_t i = 0; i < xr.size(); ++i)
      if (std::abs(xr.at(i)) < 0.1) xr.at(i) += 0.5;
    check_grads_fd(weighted([&](Tape* t) { return relu(xr, t); }), {xr}, 1e-4);

    // matmul with its own weight matrix
    Tensor b = random_tensor(rng, {n, 3});
    Tensor wmm = random_tensor(rng, {m, 3}, false);
    check_grads_fd([&](Tape* t) { return reduce_weighted(matmul(x, b, t), wmm, t); }, {x, b},
                   1e-4);

    // transpose, slice, concat
    Tensor wt = random_tensor(rng, {n, m}, false);
    check_grads_fd([&](Tape* t) { return reduce_weighted(transpose(x, t), wt, t); }, {x}, 1e-4);
    if (n >= 2) {
      Tensor ws = random_tensor(rng, {m, n - 1}, false);
      check_grads_fd([&](Tape* t) { return reduce_weighted(slice_cols(x, 1, n - 1, t), ws, t); },
                     {x}, 1e-4);
    }
    Tensor wc = random_tensor(rng, {2 * m, n}, false);
    check_grads_fd(
        [&](Tape* t) { return reduce_weighted(concat_rows({x, y}, t), wc, t); }, {x, y}, 1e-4);

    // broadcast add of a row vector
    Tensor rowv = random_tensor(rng, {1, n});
    check_grads_fd(weighted([&](Tape* t) { return add(x, rowv, t); }), {x, rowv}, 1e-4);

    // layer_norm
    Tensor gain = random_tensor(rng, {n}, true, 0.5, 1.5);
    Tensor bias = random_tensor(rng, {n});
    check_grads_fd(weighted([&](Tape* t) { return layer_norm(x, gain, bias, t); }),
                   {x, gain, bias}, 1e-4);

    // dropout with a replayed mask
    check_grads_fd(
        [&](Tape* t) {
          Rng drop_rng(seed * 1000);
          return reduce_weighted(dropout(x, 0.3, true, drop_rng, t), wr, t);
        },
        {x}, 1e-4);
  }
}
